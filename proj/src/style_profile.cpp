// SPDX-License-Identifier: Apache-2.0

#include "lexstyle/style_profile.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "lexstyle/error.hpp"
#include "lexstyle/io.hpp"

namespace lexstyle {

LexicalVector fraction_vector(std::span<const std::string> tokens, const StyleScoreTable& table,
                              VectorRole role) {
  if (tokens.empty()) throw InputError("fraction_vector: empty token sequence");
  std::array<std::size_t, kNumCategories> counts{};
  for (const std::string& tok : tokens) {
    const StyleScores* s = table.find(tok);
    if (!s) continue;
    for (std::size_t c = 0; c < kNumCategories; ++c)
      if ((*s)[c] > 0.0) ++counts[c];
  }
  LexicalVector v;
  v.role = role;
  const double m = static_cast<double>(tokens.size());
  for (std::size_t c = 0; c < kNumCategories; ++c) v.values[c] = static_cast<double>(counts[c]) / m;
  return v;
}

StyleLookup::StyleLookup(const StyleScoreTable& table, std::span<const std::string> id_to_word)
    : bits_(id_to_word.size(), 0) {
  for (std::size_t id = 0; id < id_to_word.size(); ++id)
    for (StyleCategory c : kAllCategories)
      if (table.inclination(id_to_word[id], c))
        bits_[id] |= static_cast<std::uint8_t>(1u << index_of(c));
}

bool StyleLookup::inclined(int id, StyleCategory c) const {
  if (id < 0 || static_cast<std::size_t>(id) >= bits_.size()) return false;
  return (bits_[static_cast<std::size_t>(id)] >> index_of(c)) & 1u;
}

LexicalVector StyleLookup::fraction_vector(std::span<const int> ids, VectorRole role) const {
  if (ids.empty()) throw InputError("fraction_vector: empty token sequence");
  std::array<std::size_t, kNumCategories> counts{};
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= bits_.size()) continue;
    const std::uint8_t b = bits_[static_cast<std::size_t>(id)];
    for (std::size_t c = 0; c < kNumCategories; ++c) counts[c] += (b >> c) & 1u;
  }
  LexicalVector v;
  v.role = role;
  const double m = static_cast<double>(ids.size());
  for (std::size_t c = 0; c < kNumCategories; ++c) v.values[c] = static_cast<double>(counts[c]) / m;
  return v;
}

LexicalVector corpus_average(std::span<const LexicalVector> vectors) {
  if (vectors.empty()) throw InputError("corpus_average: no vectors");
  LexicalVector avg;
  avg.role = VectorRole::corpus_average;
  for (const LexicalVector& v : vectors)
    for (std::size_t c = 0; c < kNumCategories; ++c) avg.values[c] += v.values[c];
  for (double& x : avg.values) x /= static_cast<double>(vectors.size());
  return avg;
}

double euclidean_distance(const LexicalVector& a, const LexicalVector& b) {
  double sq = 0.0;
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    const double d = a.values[c] - b.values[c];
    sq += d * d;
  }
  return std::sqrt(sq);
}

std::vector<RankedAuthor> rank_by_deviation(const std::map<std::string, LexicalVector>& vectors,
                                            std::size_t k) {
  if (k == 0) return {};
  if (k > vectors.size())
    throw InputError("rank_by_deviation: k=" + std::to_string(k) + " exceeds " +
                     std::to_string(vectors.size()) + " authors");
  std::vector<LexicalVector> all;
  for (const auto& [id, v] : vectors) all.push_back(v);
  const LexicalVector avg = corpus_average(all);

  std::vector<RankedAuthor> ranked;
  for (const auto& [id, v] : vectors) ranked.push_back({id, euclidean_distance(v, avg)});
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedAuthor& a, const RankedAuthor& b) {
    if (a.distance != b.distance) return a.distance > b.distance;
    return a.author < b.author;
  });
  ranked.resize(k);
  return ranked;
}

std::string format_profiles(const std::map<std::string, LexicalVector>& profiles) {
  std::string out(kProfileMagic);
  for (StyleCategory c : kAllCategories) {
    out.push_back('\t');
    out.append(category_name(c));
  }
  out.push_back('\n');
  for (const auto& [id, v] : profiles) {
    out.append(id);
    for (double x : v.values) {
      out.push_back('\t');
      out.append(io::fixed6(x));
    }
    out.push_back('\n');
  }
  return out;
}

std::map<std::string, LexicalVector> parse_profiles(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind(kProfileMagic, 0) != 0)
    throw InputError("not a lexstyle profile file (bad header)");
  std::map<std::string, LexicalVector> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id;
    row >> id;
    LexicalVector v;
    v.role = VectorRole::author_target;
    for (double& x : v.values) {
      std::string field;
      if (!(row >> field)) throw InputError("profile line for '" + id + "' is short");
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
      if (ec != std::errc() || ptr != field.data() + field.size() || x < 0.0 || x > 1.0)
        throw InputError("profile line for '" + id + "' has a bad component");
    }
    out[id] = v;
  }
  return out;
}

void save_profiles(const std::map<std::string, LexicalVector>& profiles,
                   const std::filesystem::path& path) {
  io::write_file(path, format_profiles(profiles));
}

std::map<std::string, LexicalVector> load_profiles(const std::filesystem::path& path) {
  return parse_profiles(io::read_file(path));
}

}  // namespace lexstyle
