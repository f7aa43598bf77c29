// SPDX-License-Identifier: Apache-2.0

#include "lexstyle/toy_world.hpp"

#include <algorithm>
#include <cctype>
#include <span>
#include <string_view>

#include "lexstyle/error.hpp"
#include "lexstyle/io.hpp"
#include "lexstyle/rng.hpp"

namespace lexstyle {

namespace {

// Four seeds followed by four scored-but-unlisted words per category.
constexpr std::array<std::array<std::string_view, 8>, kNumCategories> kStyleWords = {{
    {"thee", "wherefore", "yonder", "hath", "ere", "doth", "beseech", "nigh"},
    {"gonna", "yeah", "kinda", "okay", "wanna", "gotta", "stuff", "dude"},
    {"freedom", "truth", "essence", "virtue", "notion", "justice", "spirit", "reason"},
    {"wonderful", "awful", "lovely", "dreadful", "splendid", "horrid", "charming", "tedious"},
    {"stone", "bread", "rope", "brick", "table", "door", "kettle", "barrel"},
    {"measured", "recorded", "counted", "weighed", "listed", "dated", "logged", "tallied"},
}};

constexpr std::array<std::string_view, 6> kNeutralSlot = {"thing", "part", "place",
                                                          "matter", "side", "way"};

// '_' marks a style slot.
constexpr std::array<std::string_view, 12> kTemplates = {
    "the _ _ went to the _ house",
    "she said the _ was _",
    "they brought _ and _ with _",
    "he saw _ _ in the field",
    "we kept _ near the _ gate",
    "it was _ and _",
    "then the old woman spoke of _ _",
    "in the morning they found _ by the _",
    "her brother had _ and _",
    "so the children waited for _ _",
    "at the end there was _",
    "and the _ wind carried _ over the hill",
};

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t j = s.find(' ', i);
    out.emplace_back(s.substr(i, j == std::string_view::npos ? std::string_view::npos : j - i));
    if (j == std::string_view::npos) break;
    i = j + 1;
  }
  return out;
}

std::vector<std::string> neutral_vocabulary() {
  std::vector<std::string> words;
  for (std::string_view t : kTemplates)
    for (std::string& w : split_words(t))
      if (w != "_") words.push_back(std::move(w));
  for (std::string_view w : kNeutralSlot) words.emplace_back(w);
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  return words;
}

std::size_t draw_index(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return weights.size() - 1;
}

std::string fill_slot(const SlotWeights& weights, Rng& rng) {
  const std::size_t c = draw_index(weights, rng);
  if (c == kNumCategories) return std::string(kNeutralSlot[rng.below(kNeutralSlot.size())]);
  return std::string(kStyleWords[c][rng.below(kStyleWords[c].size())]);
}

std::string make_paragraph(const SlotWeights& weights, const ToyWorldOptions& opt, Rng& rng) {
  const int sentences =
      opt.min_sentences +
      static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.max_sentences - opt.min_sentences + 1)));
  std::string out;
  for (int s = 0; s < sentences; ++s) {
    std::string sentence;
    for (const std::string& w : split_words(kTemplates[rng.below(kTemplates.size())])) {
      if (!sentence.empty()) sentence += ' ';
      sentence += w == "_" ? fill_slot(weights, rng) : w;
    }
    sentence[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sentence[0])));
    if (!out.empty()) out += ' ';
    out += sentence + '.';
  }
  return out;
}

}  // namespace

ToyWorld make_toy_world(const ToyWorldOptions& opt) {
  if (opt.paragraphs_per_author < 2 || opt.min_sentences < 1 ||
      opt.max_sentences < opt.min_sentences || opt.scoring_paragraphs_per_category < 1)
    throw InputError("invalid toy world options");
  ToyWorld world;
  Rng rng(derive_seed(opt.seed, 0x7079));

  for (StyleCategory c : kAllCategories) {
    SeedLexicon lex{c, {}};
    for (std::size_t i = 0; i < 4; ++i) lex.words.emplace(kStyleWords[index_of(c)][i]);
    world.lexicons[index_of(c)] = std::move(lex);
  }

  // Scoring corpus: each paragraph carries one category's words plus every
  // neutral word. Every seed is placed at least once.
  const std::vector<std::string> neutral = neutral_vocabulary();
  for (StyleCategory c : kAllCategories) {
    const auto& words = kStyleWords[index_of(c)];
    for (int p = 0; p < opt.scoring_paragraphs_per_category; ++p) {
      std::vector<std::string> toks(neutral.begin(), neutral.end());
      for (std::size_t i = 0; i < words.size(); ++i)
        if (p == static_cast<int>(i % 4) || rng.uniform() < 0.6) toks.emplace_back(words[i]);
      rng.shuffle(toks);
      std::string para;
      for (const std::string& t : toks) para += (para.empty() ? "" : " ") + t;
      world.scoring_paragraphs.push_back(para + '.');
    }
  }

  // Order: literary, colloquial, abstract, subjective, concrete, objective, neutral.
  const std::array<std::pair<const char*, SlotWeights>, 8> authors = {{
      {"alcott", {0.14, 0.16, 0.12, 0.14, 0.16, 0.12, 0.16}},
      {"baxter", {0.10, 0.20, 0.10, 0.12, 0.20, 0.14, 0.14}},
      {"carrow", {0.16, 0.12, 0.16, 0.12, 0.12, 0.16, 0.16}},
      {"dunmore", {0.12, 0.14, 0.12, 0.18, 0.14, 0.14, 0.16}},
      {"ellery", {0.40, 0.01, 0.30, 0.22, 0.01, 0.01, 0.05}},
      {"fenwick", {0.12, 0.16, 0.10, 0.10, 0.18, 0.20, 0.14}},
      {"garland", {0.14, 0.14, 0.14, 0.14, 0.14, 0.14, 0.16}},
      {"hollis", {0.10, 0.18, 0.12, 0.14, 0.14, 0.16, 0.16}},
  }};
  world.skewed_author = "ellery";
  for (const auto& [name, weights] : authors) {
    Rng author_rng(derive_seed(opt.seed, io::fnv1a(name)));
    std::string text =
        "*** START OF THE PROJECT GUTENBERG EBOOK BY " + std::string(name) + " ***\n\n";
    for (int p = 0; p < opt.paragraphs_per_author; ++p)
      text += make_paragraph(weights, opt, author_rng) + "\n\n";
    text += "*** END OF THE PROJECT GUTENBERG EBOOK ***\n";
    world.author_texts.emplace(name, std::move(text));
    world.author_weights.emplace(name, weights);
  }
  return world;
}

void write_toy_world(const ToyWorld& world, const std::filesystem::path& dir) {
  for (StyleCategory c : kAllCategories) {
    std::string body = "# seed words: " + std::string(category_name(c)) + "\n";
    for (const std::string& w : world.lexicons[index_of(c)].words) body += w + '\n';
    io::write_file(dir / "lexicons" / (std::string(category_name(c)) + ".txt"), body);
  }
  std::string scoring;
  for (const std::string& p : world.scoring_paragraphs) scoring += p + "\n\n";
  io::write_file(dir / "scoring" / "scoring.txt", scoring);
  for (const auto& [author, text] : world.author_texts)
    io::write_file(dir / "corpus" / author / "text.txt", text);
}

}  // namespace lexstyle
