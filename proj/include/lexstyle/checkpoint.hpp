// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "lexstyle/transformer.hpp"
#include "lexstyle/vocab.hpp"

namespace lexstyle {

// Pipeline stages in the order they must be produced.
enum class Stage { pretrained, global_finetuned, author_finetuned, rl_tuned };

// Training commands; each consumes a checkpoint of a permitted stage.
enum class TrainStage { pretrain, finetune_global, finetune_author, rl };

std::string_view stage_name(Stage s);
std::optional<Stage> parse_stage(std::string_view name);
std::string_view train_stage_name(TrainStage s);
std::optional<TrainStage> parse_train_stage(std::string_view name);

Stage output_stage(TrainStage s);
// Throws LineageError unless `input` may feed `step`: pretrain takes nothing,
// finetune_global takes pretrained, finetune_author takes global_finetuned,
// rl takes global_finetuned or author_finetuned.
void check_lineage(std::optional<Stage> input, TrainStage step);

struct Checkpoint {
  Transformer model;
  Vocabulary vocab;
  Stage stage = Stage::pretrained;
  std::uint64_t seed = 0;
};

inline constexpr int kCheckpointFormatVersion = 1;

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace lexstyle
