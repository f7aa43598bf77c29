// SPDX-License-Identifier: Apache-2.0

#include "lexstyle/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lexstyle/error.hpp"

namespace lexstyle {

std::string_view sampling_mode_name(SamplingMode m) {
  switch (m) {
    case SamplingMode::nucleus: return "nucleus";
    case SamplingMode::greedy: return "greedy";
    case SamplingMode::multinomial: return "multinomial";
  }
  return "nucleus";
}

std::optional<SamplingMode> parse_sampling_mode(std::string_view name) {
  for (SamplingMode m : {SamplingMode::nucleus, SamplingMode::greedy, SamplingMode::multinomial})
    if (sampling_mode_name(m) == name) return m;
  return std::nullopt;
}

void SamplerConfig::validate() const {
  if (mode == SamplingMode::nucleus && !(p > 0.0 && p <= 1.0))
    throw InputError("nucleus p must lie in (0, 1], got " + std::to_string(p));
}

void validate_distribution(std::span<const double> dist) {
  if (dist.empty()) throw InputError("empty probability vector");
  double total = 0.0;
  for (double v : dist) {
    if (!std::isfinite(v) || v < 0.0) throw InputError("probability vector has an invalid entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw InputError("probability vector sums to " + std::to_string(total));
}

namespace {

std::vector<int> sorted_ids(std::span<const double> dist) {
  std::vector<int> ids(dist.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    if (dist[a] != dist[b]) return dist[a] > dist[b];
    return a < b;
  });
  return ids;
}

std::size_t nucleus_size(std::span<const double> dist, std::span<const int> ids, double p,
                         double* mass) {
  double cum = 0.0;
  std::size_t k = 0;
  while (k < ids.size()) {
    cum += dist[ids[k++]];
    if (cum >= p) break;
  }
  *mass = cum;
  return k;
}

int draw_linear(std::span<const double> dist, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= 0.0) continue;
    cum += dist[i];
    last_positive = static_cast<int>(i);
    if (u < cum) return last_positive;
  }
  return last_positive;
}

}  // namespace

std::vector<std::pair<int, double>> nucleus(std::span<const double> dist, double p) {
  validate_distribution(dist);
  if (!(p > 0.0 && p <= 1.0)) throw InputError("nucleus p must lie in (0, 1]");
  const std::vector<int> ids = sorted_ids(dist);
  double mass = 0.0;
  const std::size_t k = nucleus_size(dist, ids, p, &mass);
  std::vector<std::pair<int, double>> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.emplace_back(ids[i], dist[ids[i]] / mass);
  return out;
}

int sample(std::span<const double> dist, const SamplerConfig& cfg, Rng& rng) {
  validate_distribution(dist);
  switch (cfg.mode) {
    case SamplingMode::greedy:
      return static_cast<int>(std::max_element(dist.begin(), dist.end()) - dist.begin());
    case SamplingMode::multinomial:
      return draw_linear(dist, rng);
    case SamplingMode::nucleus: {
      cfg.validate();
      const std::vector<int> ids = sorted_ids(dist);
      double mass = 0.0;
      const std::size_t k = nucleus_size(dist, ids, cfg.p, &mass);
      const double u = rng.uniform() * mass;
      double cum = 0.0;
      int last_positive = ids[0];
      for (std::size_t i = 0; i < k; ++i) {
        if (dist[ids[i]] <= 0.0) break;
        cum += dist[ids[i]];
        last_positive = ids[i];
        if (u < cum) return ids[i];
      }
      return last_positive;
    }
  }
  return 0;
}

}  // namespace lexstyle
