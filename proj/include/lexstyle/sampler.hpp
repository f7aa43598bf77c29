// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "lexstyle/rng.hpp"

namespace lexstyle {

enum class SamplingMode { nucleus, greedy, multinomial };

std::string_view sampling_mode_name(SamplingMode m);
std::optional<SamplingMode> parse_sampling_mode(std::string_view name);

struct SamplerConfig {
  SamplingMode mode = SamplingMode::nucleus;
  double p = 0.9;  // nucleus mass, in (0, 1]
  std::uint64_t seed = 0;

  void validate() const;
};

// Throws InputError on a negative or non-finite entry or a total mass more
// than 1e-6 away from one.
void validate_distribution(std::span<const double> dist);

// Smallest set of highest-probability tokens with mass >= p (ties by lower
// id), renormalized, in sorted order.
std::vector<std::pair<int, double>> nucleus(std::span<const double> dist, double p);

// Draws one token id. Greedy ignores the rng and breaks ties toward the
// lowest id.
int sample(std::span<const double> dist, const SamplerConfig& cfg, Rng& rng);

}  // namespace lexstyle
