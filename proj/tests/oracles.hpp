// SPDX-License-Identifier: Apache-2.0
// Independent reference computations used by the unit and acceptance tests.
// They deliberately avoid the library's own code paths.
#pragma once

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lexstyle/lexicon.hpp"
#include "lexstyle/rng.hpp"

namespace oracle {

// Lowercase, split on spaces, strip ASCII punctuation at both ends.
inline std::vector<std::string> words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    std::size_t b = 0, e = cur.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(cur[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(cur[e - 1]))) --e;
    if (e > b) out.push_back(cur.substr(b, e - b));
    cur.clear();
  };
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  flush();
  return out;
}

struct Counts {
  std::size_t units = 0;
  std::map<std::string, std::size_t> word;
  std::map<std::pair<std::string, std::string>, std::size_t> pair;
};

// Exhaustive (word, seed, paragraph) recount.
inline Counts recount(const std::vector<std::string>& paragraphs,
                      const std::set<std::string>& seeds) {
  Counts c;
  c.units = paragraphs.size();
  std::vector<std::set<std::string>> units;
  std::set<std::string> vocab;
  for (const auto& p : paragraphs) {
    const auto w = words(p);
    units.emplace_back(w.begin(), w.end());
    vocab.insert(w.begin(), w.end());
  }
  for (const auto& w : vocab) {
    for (const auto& u : units) c.word[w] += u.count(w);
    for (const auto& s : seeds) {
      std::size_t n = 0;
      for (const auto& u : units) n += (u.count(w) && u.count(s)) ? 1 : 0;
      c.pair[{w, s}] = n;
    }
  }
  return c;
}

inline double npmi(std::size_t pair, std::size_t word, std::size_t seed, std::size_t units) {
  if (pair == 0) return -1.0;
  if (pair == units) return 0.0;
  if (pair == word && pair == seed) return 1.0;
  const double n = static_cast<double>(units);
  const double pws = pair / n, pw = word / n, ps = seed / n;
  double v = std::log(pws / (pw * ps)) / -std::log(pws);
  return v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v);
}

// Score table recomputed from the recount.
inline std::map<std::string, std::array<double, 6>> scores(const Counts& c,
                                                           const lexstyle::LexiconSet& lex) {
  using lexstyle::StyleCategory;
  std::map<std::string, std::array<double, 6>> out;
  auto mean = [&](const std::string& w, std::size_t cat) {
    double sum = 0.0;
    int n = 0;
    for (const auto& s : lex[cat].words) {
      const auto it = c.word.find(s);
      if (it == c.word.end() || it->second == 0) continue;
      sum += npmi(c.pair.at({w, s}), c.word.at(w), it->second, c.units);
      ++n;
    }
    return sum / n;
  };
  for (const auto& [w, count] : c.word) {
    if (count == 0) continue;
    std::array<double, 6> row{};
    // literary/colloquial, abstract/concrete, subjective/objective
    const std::array<std::pair<std::size_t, std::size_t>, 3> poles = {{{0, 1}, {2, 4}, {3, 5}}};
    for (auto [a, b] : poles) {
      const double s = mean(w, a) - mean(w, b);
      row[a] = s;
      row[b] = -s;
    }
    out[w] = row;
  }
  return out;
}

// z-scores with population std.
inline std::vector<double> zscores(const std::vector<double>& r) {
  double m = 0.0;
  for (double x : r) m += x;
  m /= static_cast<double>(r.size());
  double v = 0.0;
  for (double x : r) v += (x - m) * (x - m);
  const double sd = std::sqrt(v / static_cast<double>(r.size()));
  std::vector<double> out;
  for (double x : r) out.push_back((x - m) / sd);
  return out;
}

}  // namespace oracle
