// SPDX-License-Identifier: Apache-2.0

#include "lexstyle/rl_trainer.hpp"

#include <cmath>
#include <numeric>

#include "lexstyle/decoder.hpp"
#include "lexstyle/error.hpp"
#include "lexstyle/io.hpp"
#include "lexstyle/language_model.hpp"
#include "lexstyle/log.hpp"
#include "lexstyle/rng.hpp"

namespace lexstyle {

std::string_view baseline_mode_name(BaselineMode m) {
  return m == BaselineMode::mean_of_n ? "mean_of_n" : "greedy_scst";
}

std::optional<BaselineMode> parse_baseline_mode(std::string_view name) {
  if (name == "mean_of_n") return BaselineMode::mean_of_n;
  if (name == "greedy_scst") return BaselineMode::greedy_scst;
  return std::nullopt;
}

void RlConfig::validate() const {
  if (episodes_per_context < 1) throw InputError("rl: episodes_per_context must be >= 1");
  if (baseline == BaselineMode::mean_of_n && episodes_per_context < 2)
    throw InputError("rl: mean_of_n needs at least 2 episodes per context");
  if (episode_len < 1) throw InputError("rl: episode_len must be >= 1");
  if (context_len < 1) throw InputError("rl: context_len must be >= 1");
  if (!(epsilon > 0.0)) throw InputError("rl: epsilon must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InputError("rl: gamma must lie in [0, 1]");
  if (ce_interval < 0) throw InputError("rl: ce_interval must be >= 0");
  if (ce_weight < 0.0 || rl_weight < 0.0) throw InputError("rl: loss weights must be >= 0");
  if (!(learning_rate >= 0.0)) throw InputError("rl: learning_rate must be >= 0");
  if (!(std_floor > 0.0)) throw InputError("rl: std_floor must be positive");
  if (batch_contexts != 1) throw InputError("rl: only one context per update is supported");
  if (probe_interval < 0) throw InputError("rl: probe_interval must be >= 0");
  sampler.validate();
}

void RlConfig::validate(const ModelConfig& model) const {
  validate();
  if (context_len + episode_len > model.max_seq_len)
    throw InputError("rl: context_len + episode_len = " + std::to_string(context_len + episode_len) +
                     " exceeds the model's max_seq_len " + std::to_string(model.max_seq_len));
}

double Episode::sequence_log_prob() const {
  return std::accumulate(log_probs.begin(), log_probs.end(), 0.0);
}

double lexical_rmse(const LexicalVector& a, const LexicalVector& b) {
  return euclidean_distance(a, b) / std::sqrt(static_cast<double>(kNumCategories));
}

double episode_reward(const LexicalVector& episode, const LexicalVector& target, double epsilon) {
  if (!(epsilon > 0.0)) throw InputError("reward epsilon must be positive");
  return 1.0 / (lexical_rmse(episode, target) + epsilon);
}

std::vector<double> distribute_reward(double terminal, int length, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InputError("gamma must lie in [0, 1]");
  if (length < 1) throw InputError("episode length must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(length));
  double factor = 1.0;
  for (int i = length - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = factor * terminal;
    factor *= gamma;
  }
  return out;
}

Advantages compute_advantages(std::span<const double> rewards, BaselineMode mode,
                              double std_floor, std::optional<double> greedy_reward) {
  Advantages out;
  out.values.resize(rewards.size());
  if (mode == BaselineMode::greedy_scst) {
    if (!greedy_reward) throw InputError("greedy_scst needs the greedy episode's reward");
    if (rewards.empty()) throw InputError("no episode rewards");
    out.baseline = *greedy_reward;
    for (std::size_t j = 0; j < rewards.size(); ++j) out.values[j] = rewards[j] - out.baseline;
    return out;
  }
  if (rewards.size() < 2) throw InputError("mean_of_n needs at least 2 episodes");
  const double n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::max(std::sqrt(var / n), std_floor);
  out.baseline = mean;
  for (std::size_t j = 0; j < rewards.size(); ++j) out.values[j] = (rewards[j] - mean) / sd;
  return out;
}

std::vector<Episode> unroll_episodes(const Transformer& model, std::span<const int> context,
                                     const StyleLookup& lookup, const LexicalVector& target,
                                     const RlConfig& cfg, int count, const SamplerConfig& sampler,
                                     std::uint64_t seed) {
  if (count < 1) throw InputError("unroll needs at least one episode");
  if (context.size() + static_cast<std::size_t>(cfg.episode_len) >
      static_cast<std::size_t>(model.config().max_seq_len))
    throw InputError("context plus episode exceeds the model's max_seq_len");
  const auto n = static_cast<std::size_t>(count);
  const auto len = static_cast<std::size_t>(cfg.episode_len);

  std::vector<Rng> rngs;
  rngs.reserve(n);
  for (std::size_t j = 0; j < n; ++j) rngs.emplace_back(derive_seed(seed, j));

  std::vector<Episode> episodes(n);
  for (auto& e : episodes) {
    e.tokens.reserve(len);
    e.log_probs.reserve(len);
  }
  IncrementalDecoder decoder(model, context, count);
  std::vector<int> step_tokens(n);
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::vector<double> dist = decoder.distribution(static_cast<int>(j));
      const int tok = sample(dist, sampler, rngs[j]);
      step_tokens[j] = tok;
      episodes[j].tokens.push_back(tok);
      episodes[j].log_probs.push_back(decoder.log_prob(static_cast<int>(j), tok));
    }
    if (t + 1 < len) decoder.advance(step_tokens);
  }
  for (auto& e : episodes) {
    e.lexical = lookup.fraction_vector(e.tokens, VectorRole::episode);
    e.rmse = lexical_rmse(e.lexical, target);
    e.reward = 1.0 / (e.rmse + cfg.epsilon);
  }
  return episodes;
}

namespace {

struct Objective {
  PackedBatch batch;
  std::vector<LossTerm> terms;
};

Objective build_objective(std::span<const int> context, std::span<const Episode> episodes,
                          std::span<const double> advantages, double ce_weight, double rl_weight,
                          double gamma) {
  if (context.empty()) throw InputError("empty context");
  if (episodes.size() != advantages.size())
    throw InputError("episode/advantage count mismatch");
  std::vector<std::vector<int>> continuations;
  continuations.reserve(episodes.size());
  for (const Episode& e : episodes) {
    if (e.tokens.empty()) throw InputError("empty episode");
    continuations.push_back(e.tokens);
  }
  Objective obj;
  std::vector<int> first_rows;
  obj.batch = PackedBatch::shared_prefix(context, continuations, &first_rows);

  const std::size_t c = context.size();
  if (ce_weight != 0.0 && c > 1) {
    const double w = ce_weight / static_cast<double>(c - 1);
    for (std::size_t r = 0; r + 1 < c; ++r)
      obj.terms.push_back({static_cast<int>(r), context[r + 1], w});
  }
  if (rl_weight != 0.0 && !episodes.empty()) {
    const double scale = rl_weight / static_cast<double>(episodes.size());
    for (std::size_t j = 0; j < episodes.size(); ++j) {
      const auto& toks = episodes[j].tokens;
      const std::vector<double> credit =
          distribute_reward(advantages[j], static_cast<int>(toks.size()), gamma);
      for (std::size_t i = 0; i < toks.size(); ++i) {
        const int row = i == 0 ? static_cast<int>(c) - 1 : first_rows[j] + static_cast<int>(i) - 1;
        obj.terms.push_back({row, toks[i], scale * credit[i]});
      }
    }
  }
  return obj;
}

StepResult apply_objective(Transformer& model, const Objective& obj, const RlConfig& cfg) {
  StepResult result;
  const ForwardPass pass(model, obj.batch);
  result.loss = pass.loss(obj.terms);
  if (!std::isfinite(result.loss)) {
    log::warning("rl: non-finite loss, update skipped");
    result.skipped = true;
    return result;
  }
  std::vector<double> grad(model.params().size(), 0.0);
  pass.backward(obj.terms, grad);
  try {
    result.grad_norm = sgd_step(model.params(), grad, cfg.learning_rate, cfg.clip_norm);
  } catch (const NumericError& e) {
    log::warning(std::string("rl: ") + e.what() + ", update skipped");
    result.skipped = true;
  }
  return result;
}

}  // namespace

double mixed_loss(const Transformer& model, std::span<const int> context,
                  std::span<const Episode> episodes, std::span<const double> advantages,
                  double ce_weight, double rl_weight, double gamma) {
  const Objective obj = build_objective(context, episodes, advantages, ce_weight, rl_weight, gamma);
  return ForwardPass(model, obj.batch).loss(obj.terms);
}

StepResult policy_gradient_step(Transformer& model, std::span<const int> context,
                                std::span<const Episode> episodes,
                                std::span<const double> advantages, const RlConfig& cfg) {
  return apply_objective(model,
                         build_objective(context, episodes, advantages, 0.0, 1.0, cfg.gamma), cfg);
}

StepResult mixed_ce_step(Transformer& model, std::span<const int> context,
                         std::span<const Episode> episodes, std::span<const double> advantages,
                         const RlConfig& cfg) {
  return apply_objective(model,
                         build_objective(context, episodes, advantages, cfg.ce_weight,
                                         cfg.rl_weight, cfg.gamma),
                         cfg);
}

RlReport rl_train(Transformer& model, std::span<const std::vector<int>> contexts,
                  const LexicalVector& target, const StyleLookup& lookup, const RlConfig& cfg,
                  const RlHooks& hooks) {
  cfg.validate(model.config());
  RlReport report;
  const auto n = static_cast<std::size_t>(cfg.episodes_per_context);
  const std::size_t total_contexts = cfg.max_episodes / n;
  if (total_contexts == 0) return report;
  if (contexts.empty()) throw InputError("rl: no training contexts");
  for (const auto& c : contexts)
    if (c.size() != static_cast<std::size_t>(cfg.context_len))
      throw InputError("rl: every context must have exactly context_len tokens");

  SamplerConfig greedy;
  greedy.mode = SamplingMode::greedy;
  std::vector<double> rewards(n);

  for (std::size_t k = 0; k < total_contexts; ++k) {
    const std::vector<int>& context = contexts[k % contexts.size()];
    const std::uint64_t seed = derive_seed(cfg.seed, k);
    const std::vector<Episode> episodes =
        unroll_episodes(model, context, lookup, target, cfg, cfg.episodes_per_context,
                        cfg.sampler, seed);
    for (std::size_t j = 0; j < n; ++j) rewards[j] = episodes[j].reward;

    std::optional<double> greedy_reward;
    if (cfg.baseline == BaselineMode::greedy_scst)
      greedy_reward =
          unroll_episodes(model, context, lookup, target, cfg, 1, greedy, seed).front().reward;
    const Advantages adv = compute_advantages(rewards, cfg.baseline, cfg.std_floor, greedy_reward);

    const bool mixed = cfg.ce_interval > 0 && (k + 1) % static_cast<std::size_t>(cfg.ce_interval) == 0;
    const StepResult step = mixed ? mixed_ce_step(model, context, episodes, adv.values, cfg)
                                  : policy_gradient_step(model, context, episodes, adv.values, cfg);
    if (step.skipped) ++report.skipped_steps;

    report.episodes += n;
    RewardLogRow row;
    row.context_index = k;
    row.episodes = report.episodes;
    row.mean_reward = std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(n);
    row.baseline = adv.baseline;
    row.loss = step.loss;
    if (cfg.probe_interval > 0 && hooks.perplexity_probe &&
        (k + 1) % static_cast<std::size_t>(cfg.probe_interval) == 0)
      row.perplexity = hooks.perplexity_probe(model);
    report.rows.push_back(row);
    ++report.contexts;
    if (hooks.on_context) hooks.on_context(row, model);
  }
  return report;
}

RlReport rl_train(Checkpoint& ckpt, std::span<const std::vector<int>> contexts,
                  const LexicalVector& target, const StyleLookup& lookup, const RlConfig& cfg,
                  const RlHooks& hooks) {
  check_lineage(ckpt.stage, TrainStage::rl);
  RlReport report = rl_train(ckpt.model, contexts, target, lookup, cfg, hooks);
  ckpt.stage = Stage::rl_tuned;
  ckpt.seed = cfg.seed;
  return report;
}

std::string format_reward_log(std::span<const RewardLogRow> rows) {
  std::string out(kRewardLogHeader);
  out.push_back('\n');
  for (const RewardLogRow& r : rows) {
    out += std::to_string(r.context_index);
    out += '\t' + std::to_string(r.episodes);
    out += '\t' + io::fixed6(r.mean_reward);
    out += '\t' + io::fixed6(r.baseline);
    out += '\t' + io::fixed6(r.loss);
    out += '\t' + (r.perplexity ? io::fixed6(*r.perplexity) : std::string("-"));
    out.push_back('\n');
  }
  return out;
}

}  // namespace lexstyle
