// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lexstyle/lexicon.hpp"

namespace lexstyle {

// Synthetic setup with planted lexical style: a small template grammar whose
// open slots are filled with category words at author-specific rates. Words
// outside the six categories appear in every scoring paragraph, so they score
// exactly zero for every category.
struct ToyWorldOptions {
  std::uint64_t seed = 1;
  int paragraphs_per_author = 600;
  int min_sentences = 5;
  int max_sentences = 9;
  int scoring_paragraphs_per_category = 60;
};

// Slot-fill probabilities: six categories in canonical order, then neutral.
using SlotWeights = std::array<double, kNumCategories + 1>;

struct ToyWorld {
  LexiconSet lexicons;
  std::vector<std::string> scoring_paragraphs;
  std::map<std::string, std::string> author_texts;
  std::map<std::string, SlotWeights> author_weights;
  std::string skewed_author;  // planted to deviate most from the average
};

ToyWorld make_toy_world(const ToyWorldOptions& options);

// <dir>/lexicons/<category>.txt, <dir>/scoring/scoring.txt,
// <dir>/corpus/<author>/text.txt
void write_toy_world(const ToyWorld& world, const std::filesystem::path& dir);

}  // namespace lexstyle
