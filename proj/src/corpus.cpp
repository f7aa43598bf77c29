// SPDX-License-Identifier: Apache-2.0

#include "lexstyle/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <regex>
#include <sstream>

#include "lexstyle/error.hpp"
#include "lexstyle/io.hpp"
#include "lexstyle/log.hpp"
#include "lexstyle/rng.hpp"
#include "lexstyle/text.hpp"

namespace lexstyle {

std::vector<std::string> clean_paragraphs(std::string_view raw_text,
                                          std::string_view boilerplate_pattern) {
  std::vector<std::string> out;
  std::optional<std::regex> boilerplate;
  if (!boilerplate_pattern.empty())
    boilerplate.emplace(std::string(boilerplate_pattern), std::regex::ECMAScript);
  for (std::string& p : split_paragraphs(raw_text)) {
    if (boilerplate && std::regex_search(p, *boilerplate)) continue;
    if (tokenize(p).empty()) continue;
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

void fill_paragraphs(AuthorCorpus& corpus, const std::vector<std::string>& paragraphs) {
  for (std::size_t i : corpus.train_indices) corpus.train_paragraphs.push_back(paragraphs[i]);
  for (std::size_t i : corpus.test_indices) corpus.test_paragraphs.push_back(paragraphs[i]);
}

}  // namespace

AuthorCorpus split_author(std::string author_id, std::string_view raw_text, double test_fraction,
                          std::uint64_t seed, std::string_view boilerplate_pattern) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0))
    throw InputError("test_fraction must lie in [0, 1]");
  const std::vector<std::string> paragraphs = clean_paragraphs(raw_text, boilerplate_pattern);
  if (paragraphs.size() < 2)
    throw InputError("author '" + author_id + "' has fewer than 2 paragraphs");

  std::vector<std::size_t> order(paragraphs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, io::fnv1a(author_id)));
  rng.shuffle(order);

  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(paragraphs.size())));
  AuthorCorpus corpus;
  corpus.author_id = std::move(author_id);
  corpus.test_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  corpus.train_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(corpus.test_indices.begin(), corpus.test_indices.end());
  std::sort(corpus.train_indices.begin(), corpus.train_indices.end());
  fill_paragraphs(corpus, paragraphs);
  return corpus;
}

std::vector<std::string> finetune_set(const AuthorCorpus& corpus, std::size_t n) {
  if (corpus.train_paragraphs.empty())
    throw InputError("author '" + corpus.author_id + "' has an empty train split");
  if (n > corpus.train_paragraphs.size()) {
    log::warning("author '" + corpus.author_id + "': requested " + std::to_string(n) +
                 " fine-tune paragraphs, using all " +
                 std::to_string(corpus.train_paragraphs.size()));
    n = corpus.train_paragraphs.size();
  }
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < n; ++i)
    for (std::string& t : tokenize(corpus.train_paragraphs[i])) tokens.push_back(std::move(t));
  return tokens;
}

ContextSet build_contexts(const std::vector<AuthorCorpus>& corpora, std::size_t per_author,
                          std::size_t context_len, std::uint64_t seed, SplitPart part) {
  if (context_len == 0) throw InputError("context length must be positive");
  ContextSet set;
  for (const AuthorCorpus& corpus : corpora) {
    const auto& paragraphs =
        part == SplitPart::test ? corpus.test_paragraphs : corpus.train_paragraphs;
    const auto& indices = part == SplitPart::test ? corpus.test_indices : corpus.train_indices;
    if (paragraphs.size() < per_author) {
      log::warning("author '" + corpus.author_id + "' has only " +
                   std::to_string(paragraphs.size()) + " paragraphs; skipped for contexts");
      continue;
    }
    std::vector<std::vector<std::string>> tokenized;
    tokenized.reserve(paragraphs.size());
    for (const std::string& p : paragraphs) tokenized.push_back(tokenize(p));

    std::vector<std::size_t> order(paragraphs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(seed, io::fnv1a(corpus.author_id), 1));
    rng.shuffle(order);

    std::vector<std::vector<std::string>> picked;
    std::vector<std::vector<std::size_t>> picked_sources;
    for (std::size_t start : order) {
      if (picked.size() == per_author) break;
      std::vector<std::string> ctx;
      std::vector<std::size_t> used;
      for (std::size_t p = start; p < tokenized.size() && ctx.size() < context_len; ++p) {
        ctx.insert(ctx.end(), tokenized[p].begin(), tokenized[p].end());
        used.push_back(indices[p]);
      }
      if (ctx.size() < context_len) continue;
      ctx.resize(context_len);
      picked.push_back(std::move(ctx));
      picked_sources.push_back(std::move(used));
    }
    if (picked.size() < per_author) {
      log::warning("author '" + corpus.author_id + "' cannot supply " +
                   std::to_string(per_author) + " contexts of " + std::to_string(context_len) +
                   " tokens; skipped");
      continue;
    }
    for (std::size_t i = 0; i < picked.size(); ++i) {
      set.contexts.push_back(std::move(picked[i]));
      set.authors.push_back(corpus.author_id);
      set.sources.push_back(std::move(picked_sources[i]));
    }
  }
  return set;
}

std::map<std::string, std::string> load_corpus_dir(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw InputError("corpus root is not a directory: " + root.string());
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(entry.path()))
      if (f.is_regular_file() && f.path().extension() == ".txt") files.push_back(f.path());
    if (files.empty()) continue;
    std::sort(files.begin(), files.end());
    std::string text;
    for (const auto& f : files) {
      if (!text.empty()) text.append("\n\n");
      text.append(io::read_file(f));
    }
    out.emplace(entry.path().filename().string(), std::move(text));
  }
  if (out.empty()) throw InputError("no author directories with .txt files under " + root.string());
  return out;
}

SplitManifest make_split_manifest(const std::vector<AuthorCorpus>& corpora, std::uint64_t seed,
                                  double test_fraction) {
  SplitManifest m;
  m.seed = seed;
  m.test_fraction = test_fraction;
  for (const AuthorCorpus& c : corpora) m.authors[c.author_id] = {c.train_indices, c.test_indices};
  return m;
}

std::string format_split_manifest(const SplitManifest& manifest) {
  std::ostringstream out;
  out << kSplitManifestMagic << '\n';
  out << "seed\t" << manifest.seed << '\n';
  out << "test_fraction\t" << io::fixed6(manifest.test_fraction) << '\n';
  auto list = [&](const std::vector<std::size_t>& xs) {
    for (std::size_t x : xs) out << '\t' << x;
    out << '\n';
  };
  for (const auto& [author, entry] : manifest.authors) {
    out << "train\t" << author;
    list(entry.train);
    out << "test\t" << author;
    list(entry.test);
  }
  return out.str();
}

SplitManifest parse_split_manifest(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kSplitManifestMagic)
    throw InputError("not a lexstyle split manifest (bad header)");
  SplitManifest m;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string key;
    row >> key;
    if (key == "seed") {
      row >> m.seed;
    } else if (key == "test_fraction") {
      row >> m.test_fraction;
    } else if (key == "train" || key == "test") {
      std::string author;
      row >> author;
      auto& list = key == "train" ? m.authors[author].train : m.authors[author].test;
      std::size_t idx;
      while (row >> idx) list.push_back(idx);
    } else {
      throw InputError("split manifest: unknown key '" + key + "'");
    }
    if (row.fail() && !row.eof()) throw InputError("split manifest: malformed line: " + line);
  }
  return m;
}

AuthorCorpus apply_split(std::string author_id, std::string_view raw_text,
                         const SplitManifest::Entry& entry, std::string_view boilerplate_pattern) {
  const std::vector<std::string> paragraphs = clean_paragraphs(raw_text, boilerplate_pattern);
  AuthorCorpus corpus;
  corpus.author_id = std::move(author_id);
  corpus.train_indices = entry.train;
  corpus.test_indices = entry.test;
  for (const auto* list : {&entry.train, &entry.test})
    for (std::size_t i : *list)
      if (i >= paragraphs.size())
        throw InputError("split manifest index " + std::to_string(i) + " out of range for '" +
                         corpus.author_id + "'");
  fill_paragraphs(corpus, paragraphs);
  return corpus;
}

}  // namespace lexstyle
