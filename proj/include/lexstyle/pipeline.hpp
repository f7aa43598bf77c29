// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "lexstyle/checkpoint.hpp"
#include "lexstyle/config.hpp"
#include "lexstyle/corpus.hpp"
#include "lexstyle/style_profile.hpp"
#include "lexstyle/vocab.hpp"

namespace lexstyle {

// Glue shared by the command-line tool and the end-to-end tests.

std::vector<AuthorCorpus> split_corpora(const std::map<std::string, std::string>& texts,
                                        const CorpusSettings& settings, std::uint64_t seed);

// Tokens of every author's train split, authors in id order.
std::vector<std::string> train_tokens(std::span<const AuthorCorpus> corpora);
// Every author's fine-tune set (first n train paragraphs), concatenated.
std::vector<std::string> global_finetune_tokens(std::span<const AuthorCorpus> corpora,
                                                std::size_t n);
const AuthorCorpus& find_author(std::span<const AuthorCorpus> corpora, const std::string& author);

// L_tar for every author over its train split.
std::map<std::string, LexicalVector> author_profiles(std::span<const AuthorCorpus> corpora,
                                                     const StyleScoreTable& table);

std::vector<std::vector<int>> encode_contexts(const ContextSet& set, const Vocabulary& vocab);

// Fresh model over `vocab`, trained with the pretraining options.
Checkpoint pretrain_model(const Vocabulary& vocab, std::span<const std::string> tokens,
                          const ExperimentConfig& cfg, std::uint64_t seed);

// One CLM pass that moves the checkpoint to the stage's output tag.
void finetune_model(Checkpoint& ckpt, TrainStage stage, std::span<const std::string> tokens,
                    const ClmOptions& options);

}  // namespace lexstyle
