// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "lexstyle/corpus.hpp"
#include "lexstyle/evaluator.hpp"
#include "lexstyle/language_model.hpp"
#include "lexstyle/rl_trainer.hpp"
#include "lexstyle/transformer.hpp"

namespace lexstyle {

struct CorpusSettings {
  double test_fraction = 0.2;
  std::size_t finetune_paragraphs = 50;
  std::size_t eval_contexts_per_author = 5;
  std::size_t train_contexts_per_author = 50;
  std::size_t max_vocab = 5000;
  std::string boilerplate_pattern{kDefaultBoilerplatePattern};
};

// Everything a pipeline run reads; the JSON file is the source of truth and
// command-line flags override single fields.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  CorpusSettings corpus{};
  ModelConfig model{};  // vocab_size is filled in from the vocabulary
  ClmOptions pretrain{};
  ClmOptions finetune_global{};
  ClmOptions finetune_author{};
  RlConfig rl{};
  EvalOptions eval{};
  std::size_t top_k = 10;
};

inline constexpr int kConfigFormatVersion = 1;

ExperimentConfig default_config();
// Unknown keys and a missing or different format_version are InputErrors.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string format_config(const ExperimentConfig& cfg);

}  // namespace lexstyle
