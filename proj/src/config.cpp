// SPDX-License-Identifier: Apache-2.0

#include "lexstyle/config.hpp"

#include <functional>
#include <map>
#include <json.hpp>

#include "lexstyle/error.hpp"
#include "lexstyle/io.hpp"

namespace lexstyle {

using nlohmann::json;

namespace {

json clm_to_json(const ClmOptions& o) {
  return {{"epochs", o.epochs},         {"learning_rate", o.learning_rate},
          {"clip_norm", o.clip_norm},   {"final_lr_fraction", o.final_lr_fraction},
          {"window", o.window},
          {"batch_windows", o.batch_windows}};
}

json sampler_to_json(const SamplerConfig& s) {
  return {{"mode", sampling_mode_name(s.mode)}, {"p", s.p}, {"seed", s.seed}};
}

// Reads the listed keys of one section; anything else is rejected.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw InputError("config: '" + name_ + "' must be an object");
  }
  template <typename T>
  void get(const char* key, T& out) {
    seen_.emplace(key, true);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw InputError("config: bad value for " + name_ + "." + key);
    }
  }
  void sub(const char* key, const std::function<void(Section&)>& fn) {
    seen_.emplace(key, true);
    if (!j_.contains(key)) return;
    Section s(j_.at(key), name_ + "." + key);
    fn(s);
    s.finish();
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw InputError("config: unknown key " + name_ + "." + it.key());
  }

 private:
  const json& j_;
  std::string name_;
  std::map<std::string, bool> seen_;
};

void read_clm(Section& s, ClmOptions& o) {
  s.get("epochs", o.epochs);
  s.get("learning_rate", o.learning_rate);
  s.get("clip_norm", o.clip_norm);
  s.get("final_lr_fraction", o.final_lr_fraction);
  s.get("window", o.window);
  s.get("batch_windows", o.batch_windows);
}

void read_sampler(Section& s, SamplerConfig& cfg) {
  std::string mode(sampling_mode_name(cfg.mode));
  s.get("mode", mode);
  const auto m = parse_sampling_mode(mode);
  if (!m) throw InputError("config: unknown sampling mode '" + mode + "'");
  cfg.mode = *m;
  s.get("p", cfg.p);
  s.get("seed", cfg.seed);
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.pretrain.epochs = 3;
  cfg.pretrain.learning_rate = 1.0;
  cfg.pretrain.final_lr_fraction = 0.3;
  cfg.finetune_global.epochs = 1;
  cfg.finetune_global.learning_rate = 0.2;
  cfg.finetune_author.epochs = 1;
  cfg.finetune_author.learning_rate = 0.1;
  cfg.eval.sampler.seed = 7;
  return cfg;
}

std::string format_config(const ExperimentConfig& cfg) {
  const RlConfig& rl = cfg.rl;
  json j = {
      {"format_version", kConfigFormatVersion},
      {"seed", cfg.seed},
      {"top_k", cfg.top_k},
      {"corpus",
       {{"test_fraction", cfg.corpus.test_fraction},
        {"finetune_paragraphs", cfg.corpus.finetune_paragraphs},
        {"eval_contexts_per_author", cfg.corpus.eval_contexts_per_author},
        {"train_contexts_per_author", cfg.corpus.train_contexts_per_author},
        {"max_vocab", cfg.corpus.max_vocab},
        {"boilerplate_pattern", cfg.corpus.boilerplate_pattern}}},
      {"model",
       {{"layers", cfg.model.layers},
        {"heads", cfg.model.heads},
        {"width", cfg.model.width},
        {"ffn_width", cfg.model.ffn_width},
        {"max_seq_len", cfg.model.max_seq_len},
        {"norm", "pre"}}},
      {"pretrain", clm_to_json(cfg.pretrain)},
      {"finetune_global", clm_to_json(cfg.finetune_global)},
      {"finetune_author", clm_to_json(cfg.finetune_author)},
      {"rl",
       {{"episodes_per_context", rl.episodes_per_context},
        {"episode_len", rl.episode_len},
        {"context_len", rl.context_len},
        {"epsilon", rl.epsilon},
        {"gamma", rl.gamma},
        {"ce_interval", rl.ce_interval},
        {"ce_weight", rl.ce_weight},
        {"rl_weight", rl.rl_weight},
        {"baseline", baseline_mode_name(rl.baseline)},
        {"sampler", sampler_to_json(rl.sampler)},
        {"learning_rate", rl.learning_rate},
        {"clip_norm", rl.clip_norm},
        {"max_episodes", rl.max_episodes},
        {"std_floor", rl.std_floor},
        {"batch_contexts", rl.batch_contexts},
        {"probe_interval", rl.probe_interval}}},
      {"eval", {{"sampler", sampler_to_json(cfg.eval.sampler)}, {"length", cfg.eval.length}}},
  };
  return j.dump(2) + "\n";
}

ExperimentConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig cfg = default_config();
  Section root(j, "config");
  int version = 0;
  root.get("format_version", version);
  if (version != kConfigFormatVersion)
    throw InputError("config: format_version must be " + std::to_string(kConfigFormatVersion));
  root.get("seed", cfg.seed);
  root.get("top_k", cfg.top_k);
  root.sub("corpus", [&](Section& s) {
    s.get("test_fraction", cfg.corpus.test_fraction);
    s.get("finetune_paragraphs", cfg.corpus.finetune_paragraphs);
    s.get("eval_contexts_per_author", cfg.corpus.eval_contexts_per_author);
    s.get("train_contexts_per_author", cfg.corpus.train_contexts_per_author);
    s.get("max_vocab", cfg.corpus.max_vocab);
    s.get("boilerplate_pattern", cfg.corpus.boilerplate_pattern);
  });
  root.sub("model", [&](Section& s) {
    s.get("layers", cfg.model.layers);
    s.get("heads", cfg.model.heads);
    s.get("width", cfg.model.width);
    s.get("ffn_width", cfg.model.ffn_width);
    s.get("max_seq_len", cfg.model.max_seq_len);
    std::string norm = "pre";
    s.get("norm", norm);
    if (norm != "pre") throw InputError("config: only pre-norm models are supported");
  });
  root.sub("pretrain", [&](Section& s) { read_clm(s, cfg.pretrain); });
  root.sub("finetune_global", [&](Section& s) { read_clm(s, cfg.finetune_global); });
  root.sub("finetune_author", [&](Section& s) { read_clm(s, cfg.finetune_author); });
  root.sub("rl", [&](Section& s) {
    RlConfig& rl = cfg.rl;
    s.get("episodes_per_context", rl.episodes_per_context);
    s.get("episode_len", rl.episode_len);
    s.get("context_len", rl.context_len);
    s.get("epsilon", rl.epsilon);
    s.get("gamma", rl.gamma);
    s.get("ce_interval", rl.ce_interval);
    s.get("ce_weight", rl.ce_weight);
    s.get("rl_weight", rl.rl_weight);
    std::string baseline(baseline_mode_name(rl.baseline));
    s.get("baseline", baseline);
    const auto mode = parse_baseline_mode(baseline);
    if (!mode) throw InputError("config: unknown baseline mode '" + baseline + "'");
    rl.baseline = *mode;
    s.sub("sampler", [&](Section& ss) { read_sampler(ss, rl.sampler); });
    s.get("learning_rate", rl.learning_rate);
    s.get("clip_norm", rl.clip_norm);
    s.get("max_episodes", rl.max_episodes);
    s.get("std_floor", rl.std_floor);
    s.get("batch_contexts", rl.batch_contexts);
    s.get("probe_interval", rl.probe_interval);
  });
  root.sub("eval", [&](Section& s) {
    s.sub("sampler", [&](Section& ss) { read_sampler(ss, cfg.eval.sampler); });
    s.get("length", cfg.eval.length);
  });
  root.finish();
  cfg.rl.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("missing config file: " + path.string());
  return parse_config(io::read_file(path));
}

}  // namespace lexstyle
