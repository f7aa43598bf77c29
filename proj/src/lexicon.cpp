// SPDX-License-Identifier: Apache-2.0

#include "lexstyle/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "lexstyle/error.hpp"
#include "lexstyle/io.hpp"
#include "lexstyle/text.hpp"

namespace lexstyle {

namespace {

constexpr std::array<std::string_view, kNumCategories> kNames = {
    "literary", "colloquial", "abstract", "subjective", "concrete", "objective"};

}  // namespace

std::string_view category_name(StyleCategory c) { return kNames[index_of(c)]; }

std::optional<StyleCategory> parse_category(std::string_view name) {
  for (StyleCategory c : kAllCategories)
    if (kNames[index_of(c)] == name) return c;
  return std::nullopt;
}

void validate_lexicons(const LexiconSet& lexicons) {
  for (StyleCategory c : kAllCategories) {
    const SeedLexicon& lex = lexicons[index_of(c)];
    if (lex.category != c)
      throw InputError("lexicon slot " + std::string(category_name(c)) + " holds category " +
                       std::string(category_name(lex.category)));
    if (lex.words.empty())
      throw InputError("seed lexicon for " + std::string(category_name(c)) + " is empty");
    const SeedLexicon& other = lexicons[index_of(opposite(c))];
    for (const std::string& w : lex.words)
      if (other.words.count(w))
        throw InputError("seed word '" + w + "' appears in both " +
                         std::string(category_name(c)) + " and " +
                         std::string(category_name(opposite(c))));
  }
}

SeedLexicon load_lexicon_file(const std::filesystem::path& path, StyleCategory category) {
  if (!std::filesystem::exists(path)) throw InputError("missing lexicon file: " + path.string());
  const std::string text = io::read_file(path);
  SeedLexicon lex{category, {}};
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (std::string& word : tokenize(line)) lex.words.insert(std::move(word));
  }
  if (lex.words.empty()) throw InputError("lexicon file has no words: " + path.string());
  return lex;
}

LexiconSet load_lexicon_dir(const std::filesystem::path& dir) {
  LexiconSet set;
  for (StyleCategory c : kAllCategories)
    set[index_of(c)] = load_lexicon_file(dir / (std::string(category_name(c)) + ".txt"), c);
  validate_lexicons(set);
  return set;
}

// ---------------------------------------------------------------------------
// Co-occurrence counts

std::optional<std::size_t> CooccurrenceModel::word_id(std::string_view word) const {
  const auto it = word_index_.find(std::string(word));
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t CooccurrenceModel::seed_slot(std::string_view seed) const {
  const auto it = std::lower_bound(seeds_.begin(), seeds_.end(), seed);
  if (it == seeds_.end() || *it != seed)
    throw InputError("'" + std::string(seed) + "' is not a tracked seed word");
  return static_cast<std::size_t>(it - seeds_.begin());
}

std::uint64_t CooccurrenceModel::word_count(std::string_view word) const {
  const auto id = word_id(word);
  return id ? word_counts_[*id] : 0;
}

std::uint64_t CooccurrenceModel::pair_count(std::string_view word, std::string_view seed) const {
  const std::size_t slot = seed_slot(seed);
  const auto id = word_id(word);
  return id ? pair_counts_[*id * seeds_.size() + slot] : 0;
}

CooccurrenceModel build_cooccurrence(const std::vector<std::string>& paragraphs,
                                     const LexiconSet& lexicons) {
  if (paragraphs.empty()) throw InputError("co-occurrence corpus is empty");

  std::set<std::string> seed_set;
  for (const SeedLexicon& lex : lexicons) seed_set.insert(lex.words.begin(), lex.words.end());

  // Per-paragraph unique word sets.
  std::vector<std::vector<std::string>> units;
  units.reserve(paragraphs.size());
  std::set<std::string> vocab;
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    std::vector<std::string> toks = tokenize(paragraphs[i]);
    if (toks.empty())
      throw InputError("paragraph " + std::to_string(i) + " has no word tokens");
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    vocab.insert(toks.begin(), toks.end());
    units.push_back(std::move(toks));
  }

  CooccurrenceModel model;
  model.units_ = paragraphs.size();
  model.words_.assign(vocab.begin(), vocab.end());
  model.word_index_.reserve(model.words_.size());
  for (std::size_t i = 0; i < model.words_.size(); ++i)
    model.word_index_.emplace(model.words_[i], static_cast<std::uint32_t>(i));
  model.seeds_.assign(seed_set.begin(), seed_set.end());
  model.word_counts_.assign(model.words_.size(), 0);
  model.pair_counts_.assign(model.words_.size() * model.seeds_.size(), 0);

  const std::size_t n_seeds = model.seeds_.size();
  std::vector<std::size_t> present_seeds;
  std::vector<std::uint32_t> ids;
  for (const auto& unit : units) {
    ids.clear();
    present_seeds.clear();
    for (const std::string& w : unit) ids.push_back(model.word_index_.at(w));
    for (std::size_t s = 0; s < n_seeds; ++s)
      if (std::binary_search(unit.begin(), unit.end(), model.seeds_[s])) present_seeds.push_back(s);
    for (std::uint32_t id : ids) {
      ++model.word_counts_[id];
      for (std::size_t s : present_seeds) ++model.pair_counts_[id * n_seeds + s];
    }
  }
  return model;
}

double npmi_from_counts(std::uint64_t pair, std::uint64_t word, std::uint64_t seed,
                        std::uint64_t units) {
  if (word == 0 || seed == 0 || units == 0)
    throw InputError("npmi undefined: word or seed never occurs");
  if (pair == 0) return -1.0;
  if (pair == units) return 0.0;
  if (pair == word && pair == seed) return 1.0;
  const double n = static_cast<double>(units);
  const double p_ws = static_cast<double>(pair) / n;
  const double p_w = static_cast<double>(word) / n;
  const double p_s = static_cast<double>(seed) / n;
  const double value = std::log(p_ws / (p_w * p_s)) / -std::log(p_ws);
  return std::clamp(value, -1.0, 1.0);
}

double npmi(const CooccurrenceModel& model, std::string_view word, std::string_view seed) {
  const std::uint64_t pair = model.pair_count(word, seed);
  return npmi_from_counts(pair, model.word_count(word), model.word_count(seed),
                          model.unit_count());
}

// ---------------------------------------------------------------------------
// Score table

StyleScoreTable::StyleScoreTable(std::vector<std::string> words, std::vector<StyleScores> scores)
    : words_(std::move(words)), scores_(std::move(scores)) {
  if (words_.size() != scores_.size()) throw InputError("score table: word/score count mismatch");
  if (!std::is_sorted(words_.begin(), words_.end()) ||
      std::adjacent_find(words_.begin(), words_.end()) != words_.end())
    throw InputError("score table words must be sorted and unique");
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    for (double v : scores_[i])
      if (!std::isfinite(v)) throw InputError("score table: non-finite score for " + words_[i]);
    index_.emplace(words_[i], i);
  }
}

const StyleScores* StyleScoreTable::find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  return it == index_.end() ? nullptr : &scores_[it->second];
}

int StyleScoreTable::inclination(std::string_view word, StyleCategory c) const {
  const StyleScores* s = find(word);
  return (s && (*s)[index_of(c)] > 0.0) ? 1 : 0;
}

StyleScoreTable build_score_table(const CooccurrenceModel& model, const LexiconSet& lexicons) {
  validate_lexicons(lexicons);

  // Attested seeds per category, in sorted lexicon order.
  std::array<std::vector<std::string>, kNumCategories> attested;
  for (StyleCategory c : kAllCategories) {
    for (const std::string& s : lexicons[index_of(c)].words)
      if (model.word_count(s) > 0) attested[index_of(c)].push_back(s);
    if (attested[index_of(c)].empty())
      throw InputError("no seed of category " + std::string(category_name(c)) +
                       " occurs in the corpus");
  }

  auto mean_npmi = [&](const std::string& w, StyleCategory c) {
    double sum = 0.0;
    for (const std::string& s : attested[index_of(c)]) sum += npmi(model, w, s);
    return sum / static_cast<double>(attested[index_of(c)].size());
  };

  std::vector<std::string> words;
  std::vector<StyleScores> rows;
  for (const std::string& w : model.words()) {
    if (model.word_count(w) == 0) continue;
    StyleScores row{};
    for (StyleCategory c : {StyleCategory::literary, StyleCategory::abstract,
                            StyleCategory::subjective}) {
      const double score = mean_npmi(w, c) - mean_npmi(w, opposite(c));
      row[index_of(c)] = score;
      row[index_of(opposite(c))] = -score;
    }
    words.push_back(w);
    rows.push_back(row);
  }
  return StyleScoreTable(std::move(words), std::move(rows));
}

std::string format_score_table(const StyleScoreTable& table) {
  std::string out(kScoreTableMagic);
  for (StyleCategory c : kAllCategories) {
    out.push_back('\t');
    out.append(category_name(c));
  }
  out.push_back('\n');
  for (std::size_t i = 0; i < table.size(); ++i) {
    out.append(table.words()[i]);
    for (double v : table.rows()[i]) {
      out.push_back('\t');
      out.append(io::fixed6(v));
    }
    out.push_back('\n');
  }
  return out;
}

void save_score_table(const StyleScoreTable& table, const std::filesystem::path& path) {
  io::write_file(path, format_score_table(table));
}

StyleScoreTable parse_score_table(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind(kScoreTableMagic, 0) != 0)
    throw InputError("not a lexstyle score table (bad header)");
  {
    std::istringstream header(line.substr(kScoreTableMagic.size()));
    std::string name;
    for (StyleCategory c : kAllCategories)
      if (!(header >> name) || name != category_name(c))
        throw InputError("score table header has unexpected category order");
  }
  std::vector<std::string> words;
  std::vector<StyleScores> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto tab = rest.find('\t');
      fields.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (fields.size() != 1 + kNumCategories)
      throw InputError("score table line " + std::to_string(line_no) + ": expected 7 fields");
    StyleScores row{};
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      const std::string_view f = fields[c + 1];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[c]);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw InputError("score table line " + std::to_string(line_no) + ": bad number");
    }
    words.emplace_back(fields[0]);
    rows.push_back(row);
  }
  return StyleScoreTable(std::move(words), std::move(rows));
}

StyleScoreTable load_score_table(const std::filesystem::path& path) {
  return parse_score_table(io::read_file(path));
}

}  // namespace lexstyle
