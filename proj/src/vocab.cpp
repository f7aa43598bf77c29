// SPDX-License-Identifier: Apache-2.0

#include "lexstyle/vocab.hpp"

#include <algorithm>
#include <map>

#include "lexstyle/error.hpp"
#include "lexstyle/io.hpp"

namespace lexstyle {

namespace {
const std::string kUnknownWord = "<unk>";
const std::string kPadWord = "<pad>";
}  // namespace

Vocabulary::Vocabulary() : Vocabulary(from_words({kUnknownWord, kPadWord})) {}

Vocabulary Vocabulary::from_words(std::vector<std::string> words) {
  if (words.size() < 2 || words[0] != kUnknownWord || words[1] != kPadWord)
    throw InputError("vocabulary must start with <unk> and <pad>");
  Vocabulary v{Empty{}};
  v.words_ = std::move(words);
  for (std::size_t i = 0; i < v.words_.size(); ++i)
    if (!v.index_.emplace(v.words_[i], static_cast<int>(i)).second)
      throw InputError("duplicate vocabulary word: " + v.words_[i]);
  return v;
}

Vocabulary Vocabulary::build(std::span<const std::string> tokens, std::size_t max_size) {
  if (max_size < 3) throw InputError("vocabulary cap must leave room for one word");
  std::map<std::string, std::size_t> freq;
  for (const std::string& t : tokens)
    if (t != kUnknownWord && t != kPadWord) ++freq[t];
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > max_size - 2) ranked.resize(max_size - 2);
  std::vector<std::string> words = {kUnknownWord, kPadWord};
  for (auto& [w, n] : ranked) words.push_back(w);
  return from_words(std::move(words));
}

int Vocabulary::id(const std::string& word) const {
  const auto it = index_.find(word);
  return it == index_.end() ? kUnknown : it->second;
}

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) return words_[kUnknown];
  return words_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocabulary::decode(std::span<const int> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(word(i));
  return out;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = io::fnv1a("");
  for (const std::string& w : words_) {
    h = io::fnv1a(w, h);
    h = io::fnv1a("\n", h);
  }
  return h;
}

}  // namespace lexstyle
