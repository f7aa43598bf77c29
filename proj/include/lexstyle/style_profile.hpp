// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexstyle/lexicon.hpp"

namespace lexstyle {

enum class VectorRole { author_target, episode, sequence, corpus_average };

// Fraction of tokens inclined to each category, in canonical category order.
struct LexicalVector {
  std::array<double, kNumCategories> values{};
  VectorRole role = VectorRole::sequence;

  double operator[](StyleCategory c) const { return values[index_of(c)]; }
  double& operator[](StyleCategory c) { return values[index_of(c)]; }
};

// Throws InputError on an empty token sequence.
LexicalVector fraction_vector(std::span<const std::string> tokens, const StyleScoreTable& table,
                              VectorRole role = VectorRole::sequence);

// Per-id inclination bits for a fixed id -> word mapping, so episode scoring
// does not go through string lookups. Agrees with fraction_vector on words.
class StyleLookup {
 public:
  StyleLookup(const StyleScoreTable& table, std::span<const std::string> id_to_word);

  std::size_t size() const { return bits_.size(); }
  bool inclined(int id, StyleCategory c) const;
  LexicalVector fraction_vector(std::span<const int> ids,
                                VectorRole role = VectorRole::sequence) const;

 private:
  std::vector<std::uint8_t> bits_;
};

LexicalVector corpus_average(std::span<const LexicalVector> vectors);

double euclidean_distance(const LexicalVector& a, const LexicalVector& b);

struct RankedAuthor {
  std::string author;
  double distance = 0.0;
};

// Descending distance from the corpus average; ties by author id. Throws when
// k exceeds the author count.
std::vector<RankedAuthor> rank_by_deviation(const std::map<std::string, LexicalVector>& vectors,
                                            std::size_t k);

inline constexpr std::string_view kProfileMagic = "# lexstyle-profiles v1";

std::string format_profiles(const std::map<std::string, LexicalVector>& profiles);
std::map<std::string, LexicalVector> parse_profiles(std::string_view text);
void save_profiles(const std::map<std::string, LexicalVector>& profiles,
                   const std::filesystem::path& path);
std::map<std::string, LexicalVector> load_profiles(const std::filesystem::path& path);

}  // namespace lexstyle
