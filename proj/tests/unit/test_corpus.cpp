// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "lexstyle/corpus.hpp"
#include "lexstyle/error.hpp"
#include "lexstyle/io.hpp"
#include "lexstyle/text.hpp"

using namespace lexstyle;

namespace {

std::string numbered_text(int paragraphs, int words_each = 12) {
  std::string text = "*** START OF THE PROJECT GUTENBERG EBOOK SAMPLE ***\n\n";
  for (int p = 0; p < paragraphs; ++p) {
    for (int w = 0; w < words_each; ++w) text += "p" + std::to_string(p) + "w" + std::to_string(w) + " ";
    text += "\n\n";
  }
  text += "*** END OF THE PROJECT GUTENBERG EBOOK SAMPLE ***\n";
  return text;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("paragraph splitting and boilerplate removal") {
    const auto paras = split_paragraphs("a b\nc\n\n \n\nd\n\n\n");
    CHECK(paras == std::vector<std::string>{"a b\nc", "d"});
    const auto clean = clean_paragraphs(numbered_text(3) + "\n\n...\n");
    CHECK(clean.size() == 3);
    CHECK(clean.front().rfind("p0w0", 0) == 0);
  }

  TEST_CASE("ten paragraphs split eight to two") {
    const AuthorCorpus c = split_author("alcott", numbered_text(10), 0.2, 42);
    CHECK(c.train_indices.size() == 8);
    CHECK(c.test_indices.size() == 2);
    CHECK(std::is_sorted(c.train_indices.begin(), c.train_indices.end()));
    std::set<std::size_t> all(c.train_indices.begin(), c.train_indices.end());
    for (std::size_t i : c.test_indices) CHECK(all.insert(i).second);
    CHECK(all.size() == 10);
    CHECK(c.train_paragraphs.size() == 8);
  }

  TEST_CASE("split is deterministic per seed") {
    const std::string text = numbered_text(40);
    const auto a = split_author("x", text, 0.2, 7);
    const auto b = split_author("x", text, 0.2, 7);
    CHECK(a.test_indices == b.test_indices);
    bool differs = false;
    for (std::uint64_t s = 8; s < 13 && !differs; ++s)
      differs = split_author("x", text, 0.2, s).test_indices != a.test_indices;
    CHECK(differs);
  }

  TEST_CASE("split edge cases") {
    CHECK(split_author("x", numbered_text(5), 0.0, 1).test_indices.empty());
    CHECK_THROWS_AS(split_author("x", numbered_text(1), 0.2, 1), InputError);
    CHECK_THROWS_AS(split_author("x", numbered_text(5), 1.5, 1), InputError);
  }

  TEST_CASE("fine-tune set takes leading train paragraphs and clamps") {
    const auto c = split_author("x", numbered_text(10, 3), 0.2, 3);
    const auto two = finetune_set(c, 2);
    CHECK(two.size() == 6);
    CHECK(two.front() == tokenize(c.train_paragraphs[0]).front());
    CHECK(finetune_set(c, 100).size() == 24);
  }

  TEST_CASE("contexts have exact length and come from the requested part") {
    std::vector<AuthorCorpus> corpora = {split_author("a", numbered_text(60), 0.2, 5),
                                         split_author("b", numbered_text(60), 0.2, 5),
                                         split_author("short", numbered_text(4), 0.5, 5)};
    const ContextSet set = build_contexts(corpora, 3, 30, 9, SplitPart::test);
    REQUIRE(set.contexts.size() == 6);
    for (std::size_t i = 0; i < set.contexts.size(); ++i) {
      CHECK(set.contexts[i].size() == 30);
      const AuthorCorpus& src = set.authors[i] == "a" ? corpora[0] : corpora[1];
      for (std::size_t p : set.sources[i])
        CHECK(std::find(src.test_indices.begin(), src.test_indices.end(), p) !=
              src.test_indices.end());
    }
    const ContextSet again = build_contexts(corpora, 3, 30, 9, SplitPart::test);
    CHECK(again.contexts == set.contexts);
    const ContextSet train = build_contexts(corpora, 3, 30, 9, SplitPart::train);
    for (std::size_t i = 0; i < train.contexts.size(); ++i)
      for (std::size_t j = 0; j < set.contexts.size(); ++j)
        if (train.authors[i] == set.authors[j])
          CHECK(train.contexts[i].front() != set.contexts[j].front());
  }

  TEST_CASE("split manifest round trip and reapplication") {
    const std::string text = numbered_text(25);
    std::vector<AuthorCorpus> corpora = {split_author("a", text, 0.2, 11)};
    const SplitManifest m = make_split_manifest(corpora, 11, 0.2);
    const std::string fmt = format_split_manifest(m);
    CHECK(fmt.rfind(kSplitManifestMagic, 0) == 0);
    const SplitManifest back = parse_split_manifest(fmt);
    CHECK(format_split_manifest(back) == fmt);
    const AuthorCorpus re = apply_split("a", text, back.authors.at("a"));
    CHECK(re.train_paragraphs == corpora[0].train_paragraphs);
    CHECK(re.test_paragraphs == corpora[0].test_paragraphs);
    CHECK_THROWS_AS(apply_split("a", numbered_text(3), back.authors.at("a")), InputError);
    CHECK_THROWS_AS(parse_split_manifest("bad"), InputError);
  }

  TEST_CASE("corpus directory loading") {
    const auto root = std::filesystem::temp_directory_path() / "lexstyle_corpus_test";
    std::filesystem::remove_all(root);
    io::write_file(root / "b" / "2.txt", "second");
    io::write_file(root / "b" / "1.txt", "first");
    io::write_file(root / "a" / "x.txt", "only");
    const auto texts = load_corpus_dir(root);
    REQUIRE(texts.size() == 2);
    CHECK(texts.at("a").find("only") != std::string::npos);
    CHECK(texts.at("b").find("first") < texts.at("b").find("second"));
    std::filesystem::remove_all(root);
    CHECK_THROWS_AS(load_corpus_dir(root), InputError);
  }
}
