// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace lexstyle {

// Word <-> id bijection. Id 0 is the unknown word, id 1 is padding.
class Vocabulary {
 public:
  static constexpr int kUnknown = 0;
  static constexpr int kPad = 1;

  Vocabulary();
  // Keeps the max_size - 2 most frequent words; ties broken alphabetically.
  static Vocabulary build(std::span<const std::string> tokens, std::size_t max_size = 5000);
  // Words in id order, starting with the two reserved entries.
  static Vocabulary from_words(std::vector<std::string> words);

  std::size_t size() const { return words_.size(); }
  int id(const std::string& word) const;
  const std::string& word(int id) const;
  const std::vector<std::string>& words() const { return words_; }

  std::vector<int> encode(std::span<const std::string> tokens) const;
  std::vector<std::string> decode(std::span<const int> ids) const;

  std::uint64_t hash() const;

 private:
  struct Empty {};
  explicit Vocabulary(Empty) {}

  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace lexstyle
