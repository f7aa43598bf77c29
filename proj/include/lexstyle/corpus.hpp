// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace lexstyle {

// Drops Project Gutenberg banner and license paragraphs.
inline constexpr std::string_view kDefaultBoilerplatePattern =
    R"((\*\*\*\s*(START|END) OF (THE|THIS) PROJECT GUTENBERG)|(Project Gutenberg(-tm)? (License|EBook|eBook)))";

struct AuthorCorpus {
  std::string author_id;
  // Indices refer to the cleaned paragraph list of the author's raw text;
  // both index lists are ascending and the paragraph lists follow them.
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::vector<std::string> train_paragraphs;
  std::vector<std::string> test_paragraphs;
};

// Blank-line paragraphs minus boilerplate matches and paragraphs without word tokens.
std::vector<std::string> clean_paragraphs(std::string_view raw_text,
                                          std::string_view boilerplate_pattern =
                                              kDefaultBoilerplatePattern);

// Seeded shuffle of paragraph indices; round(test_fraction * n) go to test.
// Throws InputError with fewer than 2 paragraphs.
AuthorCorpus split_author(std::string author_id, std::string_view raw_text, double test_fraction,
                          std::uint64_t seed,
                          std::string_view boilerplate_pattern = kDefaultBoilerplatePattern);

// First n train paragraphs, concatenated and tokenized. Clamps with a warning.
std::vector<std::string> finetune_set(const AuthorCorpus& corpus, std::size_t n);

enum class SplitPart { train, test };

struct ContextSet {
  std::vector<std::vector<std::string>> contexts;  // each exactly context_len words
  std::vector<std::string> authors;                // source author per context
  std::vector<std::vector<std::size_t>> sources;   // paragraph indices used per context
};

// per_author seeded paragraph picks per author, each extended with following
// paragraphs of the same part until context_len words, then truncated. Authors
// that cannot supply per_author full contexts are skipped with a warning.
ContextSet build_contexts(const std::vector<AuthorCorpus>& corpora, std::size_t per_author,
                          std::size_t context_len, std::uint64_t seed,
                          SplitPart part = SplitPart::test);

// corpus_root/<author_id>/*.txt; files of one author joined in filename order.
std::map<std::string, std::string> load_corpus_dir(const std::filesystem::path& root);

struct SplitManifest {
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  struct Entry {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
  };
  std::map<std::string, Entry> authors;
};

inline constexpr std::string_view kSplitManifestMagic = "# lexstyle-split v1";

SplitManifest make_split_manifest(const std::vector<AuthorCorpus>& corpora, std::uint64_t seed,
                                  double test_fraction);
std::string format_split_manifest(const SplitManifest& manifest);
SplitManifest parse_split_manifest(std::string_view text);
// Rebuilds an AuthorCorpus from a manifest entry; throws if indices do not fit.
AuthorCorpus apply_split(std::string author_id, std::string_view raw_text,
                         const SplitManifest::Entry& entry,
                         std::string_view boilerplate_pattern = kDefaultBoilerplatePattern);

}  // namespace lexstyle
