// SPDX-License-Identifier: Apache-2.0

#include "lexstyle/pipeline.hpp"

#include "lexstyle/error.hpp"
#include "lexstyle/language_model.hpp"
#include "lexstyle/text.hpp"

namespace lexstyle {

std::vector<AuthorCorpus> split_corpora(const std::map<std::string, std::string>& texts,
                                        const CorpusSettings& settings, std::uint64_t seed) {
  if (texts.empty()) throw InputError("corpus has no authors");
  std::vector<AuthorCorpus> out;
  for (const auto& [author, text] : texts)
    out.push_back(
        split_author(author, text, settings.test_fraction, seed, settings.boilerplate_pattern));
  return out;
}

std::vector<std::string> train_tokens(std::span<const AuthorCorpus> corpora) {
  std::vector<std::string> out;
  for (const AuthorCorpus& c : corpora)
    for (const std::string& p : c.train_paragraphs) {
      std::vector<std::string> toks = tokenize(p);
      out.insert(out.end(), toks.begin(), toks.end());
    }
  return out;
}

std::vector<std::string> global_finetune_tokens(std::span<const AuthorCorpus> corpora,
                                                std::size_t n) {
  std::vector<std::string> out;
  for (const AuthorCorpus& c : corpora) {
    std::vector<std::string> toks = finetune_set(c, n);
    out.insert(out.end(), toks.begin(), toks.end());
  }
  return out;
}

const AuthorCorpus& find_author(std::span<const AuthorCorpus> corpora, const std::string& author) {
  for (const AuthorCorpus& c : corpora)
    if (c.author_id == author) return c;
  throw InputError("unknown author '" + author + "'");
}

std::map<std::string, LexicalVector> author_profiles(std::span<const AuthorCorpus> corpora,
                                                     const StyleScoreTable& table) {
  std::map<std::string, LexicalVector> out;
  for (const AuthorCorpus& c : corpora) {
    const std::vector<std::string> toks = train_tokens(std::span<const AuthorCorpus>(&c, 1));
    out.emplace(c.author_id, fraction_vector(toks, table, VectorRole::author_target));
  }
  return out;
}

std::vector<std::vector<int>> encode_contexts(const ContextSet& set, const Vocabulary& vocab) {
  std::vector<std::vector<int>> out;
  out.reserve(set.contexts.size());
  for (const auto& ctx : set.contexts) out.push_back(vocab.encode(ctx));
  return out;
}

Checkpoint pretrain_model(const Vocabulary& vocab, std::span<const std::string> tokens,
                          const ExperimentConfig& cfg, std::uint64_t seed) {
  check_lineage(std::nullopt, TrainStage::pretrain);
  ModelConfig mc = cfg.model;
  mc.vocab_size = static_cast<int>(vocab.size());
  Checkpoint ckpt{Transformer::initialized(mc, seed), vocab, Stage::pretrained, seed};
  ClmOptions opt = cfg.pretrain;
  opt.seed = seed;
  clm_train(ckpt.model, vocab.encode(tokens), opt);
  return ckpt;
}

void finetune_model(Checkpoint& ckpt, TrainStage stage, std::span<const std::string> tokens,
                    const ClmOptions& options) {
  check_lineage(ckpt.stage, stage);
  if (stage != TrainStage::finetune_global && stage != TrainStage::finetune_author)
    throw InputError("finetune_model handles fine-tuning stages only");
  clm_train(ckpt.model, ckpt.vocab.encode(tokens), options);
  ckpt.stage = output_stage(stage);
  ckpt.seed = options.seed;
}

}  // namespace lexstyle
