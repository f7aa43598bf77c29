// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "lexstyle/error.hpp"
#include "lexstyle/sampler.hpp"

using namespace lexstyle;

namespace {

std::vector<int> draw_counts(const std::vector<double>& dist, const SamplerConfig& cfg, int n) {
  Rng rng(cfg.seed);
  std::vector<int> counts(dist.size(), 0);
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(sample(dist, cfg, rng))];
  return counts;
}

bool within_3se(int count, int n, double p) {
  const double se = std::sqrt(p * (1 - p) / n);
  return std::abs(static_cast<double>(count) / n - p) <= 3 * se;
}

}  // namespace

TEST_SUITE("sampler") {
  TEST_CASE("nucleus set for p = 0.7") {
    const std::vector<double> dist = {0.5, 0.3, 0.2};
    const auto nuc = nucleus(dist, 0.7);
    REQUIRE(nuc.size() == 2);
    CHECK(nuc[0].first == 0);
    CHECK(nuc[0].second == doctest::Approx(0.625));
    CHECK(nuc[1].first == 1);
    CHECK(nuc[1].second == doctest::Approx(0.375));
    CHECK(nucleus(dist, 0.5).size() == 1);
    CHECK(nucleus(dist, 1.0).size() == 3);
  }

  TEST_CASE("nucleus ties favor lower ids") {
    const std::vector<double> dist = {0.25, 0.25, 0.25, 0.25};
    const auto nuc = nucleus(dist, 0.5);
    REQUIRE(nuc.size() == 2);
    CHECK(nuc[0].first == 0);
    CHECK(nuc[1].first == 1);
  }

  TEST_CASE("nucleus draw frequencies") {
    const std::vector<double> dist = {0.5, 0.3, 0.2};
    SamplerConfig cfg{SamplingMode::nucleus, 0.7, 12345};
    const int n = 10000;
    const auto counts = draw_counts(dist, cfg, n);
    CHECK(counts[2] == 0);
    CHECK(within_3se(counts[0], n, 0.625));
  }

  TEST_CASE("full-mass nucleus matches multinomial frequencies") {
    const std::vector<double> dist = {0.1, 0.45, 0.05, 0.4};
    const int n = 10000;
    const auto nuc = draw_counts(dist, {SamplingMode::nucleus, 1.0, 99}, n);
    const auto mul = draw_counts(dist, {SamplingMode::multinomial, 0.9, 98}, n);
    for (std::size_t i = 0; i < dist.size(); ++i) {
      CHECK(within_3se(nuc[i], n, dist[i]));
      CHECK(within_3se(mul[i], n, dist[i]));
    }
  }

  TEST_CASE("greedy takes the argmax and breaks ties low") {
    Rng rng(1);
    SamplerConfig g{SamplingMode::greedy, 0.9, 0};
    CHECK(sample(std::vector<double>{0.2, 0.5, 0.3}, g, rng) == 1);
    CHECK(sample(std::vector<double>{0.4, 0.2, 0.4}, g, rng) == 0);
  }

  TEST_CASE("invalid inputs") {
    Rng rng(1);
    SamplerConfig cfg;
    CHECK_THROWS_AS(sample(std::vector<double>{0.5, 0.6}, cfg, rng), InputError);
    CHECK_THROWS_AS(sample(std::vector<double>{1.2, -0.2}, cfg, rng), InputError);
    CHECK_THROWS_AS(validate_distribution(std::vector<double>{NAN, 1.0}), InputError);
    CHECK_NOTHROW(validate_distribution(std::vector<double>{0.5, 0.5 + 5e-7}));
    cfg.p = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg.p = 1.1;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    CHECK(parse_sampling_mode("nucleus") == SamplingMode::nucleus);
    CHECK(!parse_sampling_mode("beam"));
  }
}
