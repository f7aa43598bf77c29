// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lexstyle/error.hpp"
#include "lexstyle/rng.hpp"
#include "lexstyle/style_profile.hpp"

using namespace lexstyle;

namespace {

StyleScoreTable random_table(Rng& rng, std::vector<std::string>& words) {
  words.clear();
  for (int i = 0; i < 20; ++i) words.push_back("w" + std::to_string(10 + i));
  std::vector<StyleScores> rows;
  for (std::size_t i = 0; i < words.size(); ++i) {
    StyleScores s{};
    for (auto [a, b] : {std::pair{0, 1}, {2, 4}, {3, 5}}) {
      const double v = rng.below(3) == 0 ? 0.0 : rng.uniform() - 0.5;
      s[a] = v;
      s[b] = -v;
    }
    rows.push_back(s);
  }
  return StyleScoreTable(words, rows);
}

std::vector<std::string> random_tokens(Rng& rng, const std::vector<std::string>& words,
                                       std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(rng.below(10) == 0 ? "unscored" : words[rng.below(words.size())]);
  return out;
}

LexicalVector vec(std::array<double, kNumCategories> v) { return {v, VectorRole::sequence}; }

}  // namespace

TEST_SUITE("style_profile") {
  TEST_CASE("fraction vector matches a per-token recount") {
    Rng rng(4);
    std::vector<std::string> words;
    const StyleScoreTable table = random_table(rng, words);
    for (int trial = 0; trial < 100; ++trial) {
      const auto tokens = random_tokens(rng, words, 1 + rng.below(120));
      const LexicalVector v = fraction_vector(tokens, table, VectorRole::episode);
      CHECK(v.role == VectorRole::episode);
      for (std::size_t c = 0; c < kNumCategories; ++c) {
        std::size_t hits = 0;
        for (const auto& t : tokens) {
          const StyleScores* s = table.find(t);
          if (s != nullptr && (*s)[c] > 0.0) ++hits;
        }
        CHECK(v.values[c] == static_cast<double>(hits) / static_cast<double>(tokens.size()));
      }
    }
  }

  TEST_CASE("permutation and concatenation identities") {
    Rng rng(8);
    std::vector<std::string> words;
    const StyleScoreTable table = random_table(rng, words);
    for (int trial = 0; trial < 50; ++trial) {
      auto a = random_tokens(rng, words, 1 + rng.below(60));
      const auto b = random_tokens(rng, words, 1 + rng.below(60));
      const LexicalVector fa = fraction_vector(a, table);
      const LexicalVector fb = fraction_vector(b, table);

      auto shuffled = a;
      rng.shuffle(shuffled);
      const LexicalVector fs = fraction_vector(shuffled, table);

      auto ab = a;
      ab.insert(ab.end(), b.begin(), b.end());
      const LexicalVector fab = fraction_vector(ab, table);
      const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
      for (std::size_t c = 0; c < kNumCategories; ++c) {
        CHECK(std::abs(fs.values[c] - fa.values[c]) <= 1e-12);
        CHECK(std::abs(fab.values[c] - (na * fa.values[c] + nb * fb.values[c]) / (na + nb)) <=
              1e-12);
      }
    }
  }

  TEST_CASE("components are fractions and opposite poles sum to at most one") {
    Rng rng(15);
    std::vector<std::string> words;
    const StyleScoreTable table = random_table(rng, words);
    const auto v = fraction_vector(random_tokens(rng, words, 300), table);
    for (StyleCategory c : kAllCategories) {
      CHECK(v[c] >= 0.0);
      CHECK(v[c] <= 1.0);
      CHECK(v[c] + v[opposite(c)] <= 1.0 + 1e-15);
    }
  }

  TEST_CASE("small worked example and empty input") {
    const StyleScoreTable table({"hath", "thee", "yeah"},
                                {StyleScores{0.4, -0.4, 0, 0, 0, 0},
                                 StyleScores{0.2, -0.2, 0.1, 0, -0.1, 0},
                                 StyleScores{-0.3, 0.3, 0, 0, 0, 0}});
    const std::vector<std::string> tokens = {"thee", "hath", "yeah", "stone"};
    const auto v = fraction_vector(tokens, table);
    CHECK(v[StyleCategory::literary] == 0.5);
    CHECK(v[StyleCategory::colloquial] == 0.25);
    CHECK(v[StyleCategory::abstract] == 0.25);
    CHECK(v[StyleCategory::concrete] == 0.0);
    CHECK_THROWS_AS(fraction_vector(std::span<const std::string>{}, table), InputError);
  }

  TEST_CASE("id lookup agrees with string scoring") {
    Rng rng(23);
    std::vector<std::string> words;
    const StyleScoreTable table = random_table(rng, words);
    std::vector<std::string> id_to_word = {"<unk>", "<pad>"};
    id_to_word.insert(id_to_word.end(), words.begin(), words.end());
    id_to_word.push_back("unscored");
    const StyleLookup lookup(table, id_to_word);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<int> ids;
      std::vector<std::string> toks;
      for (int i = 0; i < 50; ++i) {
        const int id = static_cast<int>(rng.below(id_to_word.size()));
        ids.push_back(id);
        toks.push_back(id_to_word[id]);
      }
      CHECK(lookup.fraction_vector(ids).values == fraction_vector(toks, table).values);
    }
  }

  TEST_CASE("corpus average and deviation ranking") {
    std::map<std::string, LexicalVector> profiles = {
        {"a", vec({0.1, 0.1, 0.1, 0.1, 0.1, 0.1})},
        {"b", vec({0.1, 0.1, 0.1, 0.1, 0.1, 0.1})},
        {"c", vec({0.5, 0.1, 0.1, 0.1, 0.1, 0.1})},
        {"d", vec({0.1, 0.1, 0.1, 0.1, 0.1, 0.1})},
    };
    const auto ranked = rank_by_deviation(profiles, 4);
    REQUIRE(ranked.size() == 4);
    CHECK(ranked[0].author == "c");
    CHECK(ranked[0].distance == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(ranked[1].author == "a");
    CHECK(ranked[2].author == "b");
    CHECK(ranked[3].author == "d");
    CHECK(ranked[1].distance == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_THROWS_AS(rank_by_deviation(profiles, 5), InputError);
    CHECK(rank_by_deviation(profiles, 0).empty());

    std::vector<LexicalVector> all;
    for (const auto& [id, v] : profiles) all.push_back(v);
    const auto avg = corpus_average(all);
    CHECK(avg.role == VectorRole::corpus_average);
    CHECK(avg[StyleCategory::literary] == doctest::Approx(0.2));
  }

  TEST_CASE("profiles round-trip through text") {
    std::map<std::string, LexicalVector> profiles = {
        {"alcott", vec({0.125, 0.5, 0, 0.25, 0.0625, 1})},
        {"baxter", vec({0.1, 0.2, 0.3, 0.4, 0.5, 0.6})},
    };
    const std::string text = format_profiles(profiles);
    CHECK(text.rfind(kProfileMagic, 0) == 0);
    const auto parsed = parse_profiles(text);
    CHECK(format_profiles(parsed) == text);
    CHECK(parsed.at("alcott").values == profiles.at("alcott").values);
    CHECK(parsed.at("alcott").role == VectorRole::author_target);
    CHECK_THROWS_AS(parse_profiles("nope\n"), InputError);
    CHECK_THROWS_AS(parse_profiles(std::string(kProfileMagic) + "\nx\t0.1\n"), InputError);
    CHECK_THROWS_AS(
        parse_profiles(std::string(kProfileMagic) + "\nx\t2\t0\t0\t0\t0\t0\n"), InputError);
  }
}
