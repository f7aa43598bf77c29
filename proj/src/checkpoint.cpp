// SPDX-License-Identifier: Apache-2.0

#include "lexstyle/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <sstream>

#include "lexstyle/error.hpp"
#include "lexstyle/io.hpp"

namespace lexstyle {

static_assert(std::endian::native == std::endian::little,
              "checkpoint parameters are stored little-endian");

namespace {

constexpr std::array<std::string_view, 4> kStageNames = {"pretrained", "global_finetuned",
                                                         "author_finetuned", "rl_tuned"};
constexpr std::array<std::string_view, 4> kTrainStageNames = {"pretrain", "finetune_global",
                                                              "finetune_author", "rl"};
constexpr std::string_view kMagic = "lexstyle-checkpoint";

}  // namespace

std::string_view stage_name(Stage s) { return kStageNames[static_cast<std::size_t>(s)]; }

std::optional<Stage> parse_stage(std::string_view name) {
  for (std::size_t i = 0; i < kStageNames.size(); ++i)
    if (kStageNames[i] == name) return static_cast<Stage>(i);
  return std::nullopt;
}

std::string_view train_stage_name(TrainStage s) {
  return kTrainStageNames[static_cast<std::size_t>(s)];
}

std::optional<TrainStage> parse_train_stage(std::string_view name) {
  for (std::size_t i = 0; i < kTrainStageNames.size(); ++i)
    if (kTrainStageNames[i] == name) return static_cast<TrainStage>(i);
  return std::nullopt;
}

Stage output_stage(TrainStage s) {
  switch (s) {
    case TrainStage::pretrain: return Stage::pretrained;
    case TrainStage::finetune_global: return Stage::global_finetuned;
    case TrainStage::finetune_author: return Stage::author_finetuned;
    case TrainStage::rl: return Stage::rl_tuned;
  }
  return Stage::pretrained;
}

void check_lineage(std::optional<Stage> input, TrainStage step) {
  const std::string step_name(train_stage_name(step));
  auto refuse = [&](const std::string& why) {
    throw LineageError("stage '" + step_name + "' refused: " + why);
  };
  switch (step) {
    case TrainStage::pretrain:
      if (input) refuse("pretraining starts from scratch, not from a checkpoint");
      return;
    case TrainStage::finetune_global:
      if (!input) refuse("requires a pretrained checkpoint");
      if (*input != Stage::pretrained)
        refuse("requires a pretrained checkpoint, got " + std::string(stage_name(*input)));
      return;
    case TrainStage::finetune_author:
      if (!input) refuse("requires a global_finetuned checkpoint");
      if (*input != Stage::global_finetuned)
        refuse("requires a global_finetuned checkpoint, got " + std::string(stage_name(*input)));
      return;
    case TrainStage::rl:
      if (!input) refuse("requires a prior global_finetuned or author_finetuned checkpoint");
      if (*input != Stage::global_finetuned && *input != Stage::author_finetuned)
        refuse("requires a global_finetuned or author_finetuned checkpoint, got " +
               std::string(stage_name(*input)));
      return;
  }
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const ModelConfig& cfg = ckpt.model.config();
  if (static_cast<std::size_t>(cfg.vocab_size) != ckpt.vocab.size())
    throw InputError("checkpoint vocabulary size does not match the model");
  std::ostringstream out;
  out << kMagic << '\n';
  out << "format_version " << kCheckpointFormatVersion << '\n';
  out << "stage " << stage_name(ckpt.stage) << '\n';
  out << "seed " << ckpt.seed << '\n';
  out << "norm pre\n";
  out << "vocab_size " << cfg.vocab_size << '\n';
  out << "layers " << cfg.layers << '\n';
  out << "heads " << cfg.heads << '\n';
  out << "width " << cfg.width << '\n';
  out << "ffn_width " << cfg.ffn_width << '\n';
  out << "max_seq_len " << cfg.max_seq_len << '\n';
  out << "vocab_hash " << io::hex64(ckpt.vocab.hash()) << '\n';
  for (const auto& t : ckpt.model.layout().tensors)
    out << "tensor " << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
  out << "vocab_words " << ckpt.vocab.size() << '\n';
  for (const std::string& w : ckpt.vocab.words()) out << w << '\n';
  const auto params = ckpt.model.params();
  out << "params " << params.size() << '\n';
  std::string blob(params.size() * sizeof(double), '\0');
  std::memcpy(blob.data(), params.data(), blob.size());
  out << blob;
  return out.str();
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    const std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string_view::npos) throw InputError("truncated checkpoint header");
    std::string line(bytes.substr(pos, eol - pos));
    pos = eol + 1;
    return line;
  };
  auto field = [&](std::string_view key) -> std::string {
    const std::string line = next_line();
    if (line.size() <= key.size() || line.compare(0, key.size(), key) != 0 ||
        line[key.size()] != ' ')
      throw InputError("checkpoint: expected '" + std::string(key) + "', got '" + line + "'");
    return line.substr(key.size() + 1);
  };
  auto int_field = [&](std::string_view key) { return std::stoll(field(key)); };

  if (next_line() != kMagic) throw InputError("not a lexstyle checkpoint");
  const auto version = int_field("format_version");
  if (version != kCheckpointFormatVersion)
    throw InputError("unsupported checkpoint format version " + std::to_string(version));
  const auto stage = parse_stage(field("stage"));
  if (!stage) throw InputError("checkpoint has an unknown stage tag");
  const auto seed = static_cast<std::uint64_t>(std::stoull(field("seed")));
  const std::string norm = field("norm");
  if (norm != "pre")
    throw InputError("checkpoint uses '" + norm + "' normalization; only pre-norm is accepted");

  ModelConfig cfg;
  cfg.vocab_size = static_cast<int>(int_field("vocab_size"));
  cfg.layers = static_cast<int>(int_field("layers"));
  cfg.heads = static_cast<int>(int_field("heads"));
  cfg.width = static_cast<int>(int_field("width"));
  cfg.ffn_width = static_cast<int>(int_field("ffn_width"));
  cfg.max_seq_len = static_cast<int>(int_field("max_seq_len"));
  const std::string vocab_hash = field("vocab_hash");

  Transformer model(cfg);
  for (const auto& t : model.layout().tensors) {
    std::istringstream row(field("tensor"));
    std::string name;
    std::size_t rows = 0, cols = 0;
    row >> name >> rows >> cols;
    if (name != t.name || rows != t.rows || cols != t.cols)
      throw InputError("checkpoint tensor '" + name + "' does not match the architecture");
  }
  const auto n_words = static_cast<std::size_t>(int_field("vocab_words"));
  std::vector<std::string> words;
  words.reserve(n_words);
  for (std::size_t i = 0; i < n_words; ++i) words.push_back(next_line());
  Vocabulary vocab = Vocabulary::from_words(std::move(words));
  if (io::hex64(vocab.hash()) != vocab_hash) throw InputError("checkpoint vocabulary hash mismatch");
  if (vocab.size() != static_cast<std::size_t>(cfg.vocab_size))
    throw InputError("checkpoint vocabulary size mismatch");

  const auto n_params = static_cast<std::size_t>(int_field("params"));
  if (n_params != model.params().size()) throw InputError("checkpoint parameter count mismatch");
  if (bytes.size() - pos != n_params * sizeof(double))
    throw InputError("checkpoint parameter block has the wrong length");
  std::memcpy(model.params().data(), bytes.data() + pos, n_params * sizeof(double));

  return Checkpoint{std::move(model), std::move(vocab), *stage, seed};
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  io::write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(io::read_file(path));
}

}  // namespace lexstyle
