// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lexstyle {

// Canonical order is the order of the evaluation table columns.
enum class StyleCategory : std::uint8_t {
  literary = 0,
  colloquial = 1,
  abstract = 2,
  subjective = 3,
  concrete = 4,
  objective = 5,
};

inline constexpr std::size_t kNumCategories = 6;

inline constexpr std::array<StyleCategory, kNumCategories> kAllCategories = {
    StyleCategory::literary,   StyleCategory::colloquial, StyleCategory::abstract,
    StyleCategory::subjective, StyleCategory::concrete,   StyleCategory::objective};

constexpr std::size_t index_of(StyleCategory c) { return static_cast<std::size_t>(c); }

// Pole pairs: literary/colloquial, abstract/concrete, subjective/objective.
constexpr StyleCategory opposite(StyleCategory c) {
  switch (c) {
    case StyleCategory::literary: return StyleCategory::colloquial;
    case StyleCategory::colloquial: return StyleCategory::literary;
    case StyleCategory::abstract: return StyleCategory::concrete;
    case StyleCategory::concrete: return StyleCategory::abstract;
    case StyleCategory::subjective: return StyleCategory::objective;
    case StyleCategory::objective: return StyleCategory::subjective;
  }
  return c;
}

std::string_view category_name(StyleCategory c);
std::optional<StyleCategory> parse_category(std::string_view name);

struct SeedLexicon {
  StyleCategory category = StyleCategory::literary;
  std::set<std::string> words;  // lowercase
};

// One lexicon per category, indexed by index_of(category).
using LexiconSet = std::array<SeedLexicon, kNumCategories>;

// Throws InputError on an empty lexicon, a misplaced category, or a word
// shared by two opposing poles.
void validate_lexicons(const LexiconSet& lexicons);

// One word per line; blank lines and '#' comments are skipped; words are
// normalized with the scorer tokenizer.
SeedLexicon load_lexicon_file(const std::filesystem::path& path, StyleCategory category);
// Reads <dir>/<category>.txt for all six categories.
LexiconSet load_lexicon_dir(const std::filesystem::path& dir);

// Paragraph-level presence counts.
class CooccurrenceModel {
 public:
  std::uint64_t unit_count() const { return units_; }
  // Units containing the word (0 when unseen).
  std::uint64_t word_count(std::string_view word) const;
  // Units containing both; `seed` must be one of seeds().
  std::uint64_t pair_count(std::string_view word, std::string_view seed) const;

  const std::vector<std::string>& words() const { return words_; }  // sorted
  const std::vector<std::string>& seeds() const { return seeds_; }  // sorted

 private:
  friend CooccurrenceModel build_cooccurrence(const std::vector<std::string>&, const LexiconSet&);

  std::optional<std::size_t> word_id(std::string_view word) const;
  std::size_t seed_slot(std::string_view seed) const;

  std::uint64_t units_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::uint32_t> word_index_;
  std::vector<std::uint64_t> word_counts_;
  std::vector<std::string> seeds_;
  std::vector<std::uint32_t> pair_counts_;  // words_.size() x seeds_.size()
};

CooccurrenceModel build_cooccurrence(const std::vector<std::string>& paragraphs,
                                     const LexiconSet& lexicons);

// NPMI from unit counts. Zero co-occurrence gives -1; a pair present in every
// unit gives 0; a pair that always appears together gives exactly +1.
double npmi_from_counts(std::uint64_t pair, std::uint64_t word, std::uint64_t seed,
                        std::uint64_t units);
double npmi(const CooccurrenceModel& model, std::string_view word, std::string_view seed);

using StyleScores = std::array<double, kNumCategories>;

class StyleScoreTable {
 public:
  StyleScoreTable() = default;
  StyleScoreTable(std::vector<std::string> words, std::vector<StyleScores> scores);

  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<StyleScores>& rows() const { return scores_; }
  const StyleScores* find(std::string_view word) const;

  // 1 iff the word is scored and its score for `c` is strictly positive.
  int inclination(std::string_view word, StyleCategory c) const;

  friend bool operator==(const StyleScoreTable& a, const StyleScoreTable& b) {
    return a.words_ == b.words_ && a.scores_ == b.scores_;
  }

 private:
  std::vector<std::string> words_;  // sorted
  std::vector<StyleScores> scores_;
  std::unordered_map<std::string, std::size_t> index_;
};

// score_c(w) = mean NPMI with seeds(c) - mean NPMI with seeds(opposite(c)),
// over seeds attested in the corpus.
StyleScoreTable build_score_table(const CooccurrenceModel& model, const LexiconSet& lexicons);

inline constexpr std::string_view kScoreTableMagic = "# lexstyle-scores v1";

// Sorted rows, 6 decimal places.
void save_score_table(const StyleScoreTable& table, const std::filesystem::path& path);
std::string format_score_table(const StyleScoreTable& table);
StyleScoreTable load_score_table(const std::filesystem::path& path);
StyleScoreTable parse_score_table(std::string_view text);

}  // namespace lexstyle
