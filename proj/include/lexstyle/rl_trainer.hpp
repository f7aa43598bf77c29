// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexstyle/checkpoint.hpp"
#include "lexstyle/sampler.hpp"
#include "lexstyle/style_profile.hpp"
#include "lexstyle/transformer.hpp"

namespace lexstyle {

enum class BaselineMode { mean_of_n, greedy_scst };

std::string_view baseline_mode_name(BaselineMode m);
std::optional<BaselineMode> parse_baseline_mode(std::string_view name);

struct RlConfig {
  int episodes_per_context = 10;
  int episode_len = 100;
  int context_len = 200;
  double epsilon = 0.05;
  double gamma = 1.0;
  int ce_interval = 5;
  double ce_weight = 0.5;
  double rl_weight = 1.0;
  BaselineMode baseline = BaselineMode::mean_of_n;
  SamplerConfig sampler{};
  double learning_rate = 0.01;
  double clip_norm = 1.0;
  std::size_t max_episodes = 5000;
  double std_floor = 1e-6;  // lower bound on the reward std in mean_of_n
  int batch_contexts = 1;
  std::uint64_t seed = 0;
  // Contexts between perplexity probes in the reward log; 0 disables.
  int probe_interval = 0;

  void validate() const;
  // Also checks that context plus episode fits the model.
  void validate(const ModelConfig& model) const;
};

struct Episode {
  std::vector<int> tokens;
  std::vector<double> log_probs;  // under the generating parameters
  LexicalVector lexical{{}, VectorRole::episode};
  double rmse = 0.0;
  double reward = 0.0;

  double sequence_log_prob() const;
};

// rmse = |a - b| / sqrt(6)
double lexical_rmse(const LexicalVector& a, const LexicalVector& b);
// 1 / (rmse + epsilon)
double episode_reward(const LexicalVector& episode, const LexicalVector& target, double epsilon);

// R_i = gamma^(t - i) * terminal for i = 0..t, t = length - 1.
std::vector<double> distribute_reward(double terminal, int length, double gamma);

struct Advantages {
  std::vector<double> values;
  double baseline = 0.0;
};

// mean_of_n: z-scored rewards (population std, floored), baseline = mean.
// greedy_scst: r_j - greedy_reward, unstandardized.
Advantages compute_advantages(std::span<const double> rewards, BaselineMode mode,
                              double std_floor, std::optional<double> greedy_reward = {});

// `count` continuations of exactly episode_len tokens, decoded in lockstep.
// Stream j draws from its own generator seeded with derive_seed(seed, j).
std::vector<Episode> unroll_episodes(const Transformer& model, std::span<const int> context,
                                     const StyleLookup& lookup, const LexicalVector& target,
                                     const RlConfig& cfg, int count, const SamplerConfig& sampler,
                                     std::uint64_t seed);

struct StepResult {
  double loss = 0.0;
  double grad_norm = 0.0;
  bool skipped = false;
};

// J = mean_j -sum_i (distributed advantage_j)_i * log pi(x_ij), one clipped
// SGD update. Context tokens carry no log-prob terms.
StepResult policy_gradient_step(Transformer& model, std::span<const int> context,
                                std::span<const Episode> episodes,
                                std::span<const double> advantages, const RlConfig& cfg);

// ce_weight * CE(context) + rl_weight * J, one update.
StepResult mixed_ce_step(Transformer& model, std::span<const int> context,
                         std::span<const Episode> episodes, std::span<const double> advantages,
                         const RlConfig& cfg);

// Loss of mixed_ce_step without updating, for inspection.
double mixed_loss(const Transformer& model, std::span<const int> context,
                  std::span<const Episode> episodes, std::span<const double> advantages,
                  double ce_weight, double rl_weight, double gamma);

struct RewardLogRow {
  std::size_t context_index = 0;
  std::size_t episodes = 0;  // sampled episodes so far, including this context
  double mean_reward = 0.0;  // before standardization
  double baseline = 0.0;
  double loss = 0.0;
  std::optional<double> perplexity;
};

struct RlReport {
  std::vector<RewardLogRow> rows;
  std::size_t contexts = 0;
  std::size_t episodes = 0;
  std::size_t skipped_steps = 0;
};

struct RlHooks {
  // Called after each context's update.
  std::function<void(const RewardLogRow&, const Transformer&)> on_context;
  // Perplexity probe used every probe_interval contexts.
  std::function<double(const Transformer&)> perplexity_probe;
};

// floor(max_episodes / N) contexts, cycling through `contexts`; every
// ce_interval-th context uses the mixed step.
RlReport rl_train(Transformer& model, std::span<const std::vector<int>> contexts,
                  const LexicalVector& target, const StyleLookup& lookup, const RlConfig& cfg,
                  const RlHooks& hooks = {});

// Checkpoint wrapper: enforces the stage lineage and tags the result rl_tuned.
RlReport rl_train(Checkpoint& ckpt, std::span<const std::vector<int>> contexts,
                  const LexicalVector& target, const StyleLookup& lookup, const RlConfig& cfg,
                  const RlHooks& hooks = {});

inline constexpr std::string_view kRewardLogHeader =
    "context\tepisodes\tmean_reward\tbaseline\tloss\tperplexity";

std::string format_reward_log(std::span<const RewardLogRow> rows);

}  // namespace lexstyle
