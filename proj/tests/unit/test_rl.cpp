// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lexstyle/error.hpp"
#include "lexstyle/language_model.hpp"
#include "lexstyle/rl_trainer.hpp"
#include "oracles.hpp"

using namespace lexstyle;

namespace {

LexicalVector vec(std::array<double, kNumCategories> v) { return {v, VectorRole::sequence}; }

ModelConfig tiny_config(int vocab, int max_len = 32) {
  ModelConfig cfg;
  cfg.vocab_size = vocab;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.width = 8;
  cfg.ffn_width = 16;
  cfg.max_seq_len = max_len;
  return cfg;
}

// Three real words; only "c" leans literary.
struct Bandit {
  StyleScoreTable table{{"a", "b", "c"},
                        {StyleScores{-0.5, 0.5, 0, 0, 0, 0}, StyleScores{-0.5, 0.5, 0, 0, 0, 0},
                         StyleScores{0.5, -0.5, 0, 0, 0, 0}}};
  std::vector<std::string> id_to_word{"a", "b", "c"};
  StyleLookup lookup{table, id_to_word};
  LexicalVector target = vec({1, 0, 0, 0, 0, 0});
};

RlConfig bandit_config() {
  RlConfig cfg;
  cfg.episodes_per_context = 6;
  cfg.episode_len = 1;
  cfg.context_len = 1;
  cfg.ce_interval = 0;
  cfg.clip_norm = 0.0;
  cfg.learning_rate = 0.1;
  cfg.sampler.mode = SamplingMode::multinomial;
  cfg.seed = 3;
  return cfg;
}

std::vector<Episode> fixed_episodes(const std::vector<std::vector<int>>& tokens) {
  std::vector<Episode> out;
  for (const auto& t : tokens) {
    Episode e;
    e.tokens = t;
    out.push_back(e);
  }
  return out;
}

double bias_logit_prob(const Transformer& m, int ctx_token, int k) {
  return next_token_distribution(m, std::vector<int>{ctx_token})[static_cast<std::size_t>(k)];
}

}  // namespace

TEST_SUITE("rl") {
  TEST_CASE("reward formula") {
    const auto t = vec({0.3, 0.1, 0.2, 0.4, 0.0, 0.6});
    CHECK(std::abs(episode_reward(t, t, 0.05) - 20.0) <= 1e-12);
    CHECK(std::abs(episode_reward(vec({1, 1, 1, 1, 1, 1}), vec({}), 0.05) - 1.0 / 1.05) <= 1e-12);
    const double rmse = lexical_rmse(vec({0.2, 0, 0, 0, 0, 0}), vec({}));
    CHECK(rmse == doctest::Approx(0.2 / std::sqrt(6.0)).epsilon(1e-14));
    CHECK(rmse == doctest::Approx(0.08165).epsilon(1e-4));
    CHECK(episode_reward(vec({0.2, 0, 0, 0, 0, 0}), vec({}), 0.05) ==
          doctest::Approx(1.0 / (0.2 / std::sqrt(6.0) + 0.05)).epsilon(1e-14));
    // Commonly quoted as 7.5945; the formula itself gives 7.59592.
    CHECK(episode_reward(vec({0.2, 0, 0, 0, 0, 0}), vec({}), 0.05) ==
          doctest::Approx(7.5945).epsilon(1e-3));
    CHECK_THROWS_AS(episode_reward(t, t, 0.0), InputError);
  }

  TEST_CASE("reward distribution over an episode") {
    const auto flat = distribute_reward(20.0, 100, 1.0);
    CHECK(flat.size() == 100);
    CHECK(std::all_of(flat.begin(), flat.end(), [](double x) { return x == 20.0; }));
    CHECK(distribute_reward(8.0, 3, 0.5) == std::vector<double>{2.0, 4.0, 8.0});
    CHECK(distribute_reward(8.0, 3, 0.0) == std::vector<double>{0.0, 0.0, 8.0});
    CHECK_THROWS_AS(distribute_reward(1.0, 3, 1.5), InputError);
    CHECK_THROWS_AS(distribute_reward(1.0, 3, -0.1), InputError);
  }

  TEST_CASE("advantages") {
    const std::vector<double> r = {1, 2, 3};
    const Advantages a = compute_advantages(r, BaselineMode::mean_of_n, 1e-6);
    CHECK(a.baseline == 2.0);
    const auto z = oracle::zscores(r);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.values[i] == doctest::Approx(z[i]).epsilon(1e-14));
    CHECK(a.values[2] == doctest::Approx(1.2247).epsilon(1e-4));
    CHECK(a.values[0] == doctest::Approx(-1.2247).epsilon(1e-4));

    const std::vector<double> r2 = {4.5, 1.0, 7.25, 3.0, 2.5};
    const auto a2 = compute_advantages(r2, BaselineMode::mean_of_n, 1e-6).values;
    CHECK(std::abs(std::accumulate(a2.begin(), a2.end(), 0.0)) < 1e-9);
    double var = 0.0;
    for (double x : a2) var += x * x;
    CHECK(var / 5.0 == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<double> same = {5, 5, 5};
    for (double x : compute_advantages(same, BaselineMode::mean_of_n, 1e-6).values) CHECK(x == 0.0);

    const std::vector<double> one = {7.0};
    const auto g = compute_advantages(one, BaselineMode::greedy_scst, 1e-6, 5.0);
    CHECK(g.values[0] == 2.0);
    CHECK(g.baseline == 5.0);
    CHECK_THROWS_AS(compute_advantages(one, BaselineMode::mean_of_n, 1e-6), InputError);
    CHECK_THROWS_AS(compute_advantages(one, BaselineMode::greedy_scst, 1e-6), InputError);
  }

  TEST_CASE("unrolled episodes are on-policy and reproducible") {
    const Transformer m = Transformer::initialized(tiny_config(6), 2);
    const StyleScoreTable table({"c", "d"}, {StyleScores{0.2, -0.2, 0, 0, 0, 0},
                                             StyleScores{0, 0, 0.3, 0, -0.3, 0}});
    const std::vector<std::string> words = {"<unk>", "<pad>", "a", "b", "c", "d"};
    const StyleLookup lookup(table, words);
    RlConfig cfg;
    cfg.episode_len = 12;
    cfg.context_len = 5;
    const std::vector<int> context = {2, 3, 4, 5, 2};
    const auto target = vec({0.5, 0, 0.2, 0, 0, 0});
    const auto eps = unroll_episodes(m, context, lookup, target, cfg, 10, cfg.sampler, 77);
    REQUIRE(eps.size() == 10);
    for (const auto& e : eps) {
      CHECK(e.tokens.size() == 12);
      CHECK(std::abs(e.sequence_log_prob() - sequence_log_prob(m, context, e.tokens)) < 1e-6);
      const auto lv = lookup.fraction_vector(e.tokens);
      CHECK(e.lexical.values == lv.values);
      CHECK(e.reward == episode_reward(lv, target, cfg.epsilon));
    }
    const auto again = unroll_episodes(m, context, lookup, target, cfg, 10, cfg.sampler, 77);
    for (std::size_t j = 0; j < eps.size(); ++j) CHECK(again[j].tokens == eps[j].tokens);

    SamplerConfig greedy;
    greedy.mode = SamplingMode::greedy;
    const auto g1 = unroll_episodes(m, context, lookup, target, cfg, 1, greedy, 1);
    const auto g2 = unroll_episodes(m, context, lookup, target, cfg, 1, greedy, 999);
    CHECK(g1[0].tokens == g2[0].tokens);
  }

  TEST_CASE("zero advantages leave parameters bit-identical") {
    Transformer m = Transformer::initialized(tiny_config(5), 4);
    const std::vector<double> before(m.params().begin(), m.params().end());
    const auto eps = fixed_episodes({{1, 2, 3}, {4, 4, 0}});
    const std::vector<double> adv = {0.0, 0.0};
    RlConfig cfg;
    policy_gradient_step(m, std::vector<int>{2, 3}, eps, adv, cfg);
    CHECK(std::equal(before.begin(), before.end(), m.params().begin()));
  }

  TEST_CASE("bandit policy gradient matches the analytic softmax gradient") {
    const Transformer base = Transformer::initialized(tiny_config(3), 6);
    const std::vector<int> context = {0};
    const auto eps = fixed_episodes({{2}, {0}, {2}, {1}});
    const std::vector<double> adv = {1.5, -0.5, 0.75, -1.75};

    Transformer m = base;
    RlConfig cfg;
    cfg.learning_rate = 1.0;
    cfg.clip_norm = 0.0;
    policy_gradient_step(m, context, eps, adv, cfg);

    // d/dz_k of -mean_j a_j log softmax(z)[x_j] is -mean_j a_j (1[x_j = k] - pi_k); the output
    // bias enters the logits directly.
    const auto pi = next_token_distribution(base, context);
    const std::size_t b_out = base.layout().b_out;
    for (int k = 0; k < 3; ++k) {
      double g = 0.0;
      for (std::size_t j = 0; j < eps.size(); ++j)
        g -= adv[j] * ((eps[j].tokens[0] == k ? 1.0 : 0.0) - pi[static_cast<std::size_t>(k)]);
      g /= static_cast<double>(eps.size());
      const double applied = base.params()[b_out + k] - m.params()[b_out + k];
      CHECK(std::abs(applied - g) <= 1e-4 * std::max(std::abs(g), 1e-12));
    }

    // Central differences of the same objective over every parameter.
    double worst = 0.0;
    Transformer probe = base;
    const double h = 1e-5;
    for (std::size_t i = 0; i < base.params().size(); ++i) {
      const double x = base.params()[i];
      probe.params()[i] = x + h;
      const double up = mixed_loss(probe, context, eps, adv, 0.0, 1.0, 1.0);
      probe.params()[i] = x - h;
      const double down = mixed_loss(probe, context, eps, adv, 0.0, 1.0, 1.0);
      probe.params()[i] = x;
      const double numeric = (up - down) / (2 * h);
      const double analytic = base.params()[i] - m.params()[i];
      const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      worst = std::max(worst, std::abs(numeric - analytic) / denom);
    }
    MESSAGE("bandit worst relative error " << worst);
    CHECK(worst < 1e-4);
  }

  TEST_CASE("bandit training concentrates on the rewarded token") {
    Bandit b;
    Transformer m = Transformer::initialized(tiny_config(3), 8);
    RlConfig cfg = bandit_config();
    cfg.max_episodes = 200 * static_cast<std::size_t>(cfg.episodes_per_context);
    const std::vector<std::vector<int>> contexts = {{0}};
    const double before = bias_logit_prob(m, 0, 2);
    const RlReport rep = rl_train(m, contexts, b.target, b.lookup, cfg);
    CHECK(rep.contexts == 200);
    const double after = bias_logit_prob(m, 0, 2);
    MESSAGE("p(rewarded) " << before << " -> " << after);
    CHECK(after > 0.9);
  }

  TEST_CASE("a positive-advantage episode gains probability") {
    Transformer m = Transformer::initialized(tiny_config(7), 10);
    const std::vector<int> context = {1, 2, 3};
    const auto eps = fixed_episodes({{4, 5, 6}, {2, 2, 2}});
    const std::vector<double> adv = {1.0, -1.0};
    const double before = sequence_log_prob(m, context, eps[0].tokens);
    RlConfig cfg;
    cfg.learning_rate = 0.01;
    policy_gradient_step(m, context, eps, adv, cfg);
    CHECK(sequence_log_prob(m, context, eps[0].tokens) > before);
  }

  TEST_CASE("mixed loss equals independent recomputation") {
    const Transformer m = Transformer::initialized(tiny_config(9), 12);
    const std::vector<int> context = {1, 4, 2, 8, 3};
    const auto eps = fixed_episodes({{5, 6, 7, 1}, {2, 2, 3, 0}, {8, 0, 4, 4}});
    const std::vector<double> adv = {0.7, -1.1, 0.4};
    const double ce = -sequence_log_prob(m, std::span(context).first(1),
                                         std::span(context).subspan(1)) /
                      static_cast<double>(context.size() - 1);
    double j = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i)
      j -= adv[i] * sequence_log_prob(m, context, eps[i].tokens);
    j /= static_cast<double>(eps.size());
    CHECK(mixed_loss(m, context, eps, adv, 0.5, 1.0, 1.0) ==
          doctest::Approx(0.5 * ce + 1.0 * j).epsilon(1e-12));
  }

  TEST_CASE("mixed step reductions") {
    const Transformer base = Transformer::initialized(tiny_config(9), 14);
    const std::vector<int> context = {1, 4, 2, 8, 3};
    const auto eps = fixed_episodes({{5, 6}, {2, 2}});
    const std::vector<double> adv = {1.0, -1.0};

    RlConfig cfg;
    cfg.ce_weight = 0.0;
    Transformer a = base, b = base;
    mixed_ce_step(a, context, eps, adv, cfg);
    policy_gradient_step(b, context, eps, adv, cfg);
    CHECK(std::equal(a.params().begin(), a.params().end(), b.params().begin()));

    cfg.ce_weight = 0.5;
    cfg.rl_weight = 0.0;
    cfg.clip_norm = 0.0;
    Transformer c = base, d = base;
    mixed_ce_step(c, context, eps, adv, cfg);
    auto g = sequence_log_prob_gradient(base, std::span(context).first(1),
                                        std::span(context).subspan(1));
    for (double& x : g) x *= -0.5 / static_cast<double>(context.size() - 1);
    sgd_step(d.params(), g, cfg.learning_rate, 0.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      worst = std::max(worst, std::abs(c.params()[i] - d.params()[i]));
    CHECK(worst < 1e-12);
  }

  TEST_CASE("episode budget sets the number of contexts") {
    Bandit b;
    Transformer m = Transformer::initialized(tiny_config(3), 16);
    RlConfig cfg = bandit_config();
    cfg.episodes_per_context = 10;
    cfg.max_episodes = 5000;
    cfg.learning_rate = 0.0;
    std::vector<std::vector<int>> contexts = {{0}, {1}, {2}};
    const RlReport rep = rl_train(m, contexts, b.target, b.lookup, cfg);
    CHECK(rep.contexts == 500);
    CHECK(rep.episodes == 5000);
    CHECK(rep.rows.back().episodes == 5000);

    cfg.max_episodes = 0;
    cfg.learning_rate = 1.0;
    const std::vector<double> before(m.params().begin(), m.params().end());
    CHECK(rl_train(m, contexts, b.target, b.lookup, cfg).contexts == 0);
    CHECK(std::equal(before.begin(), before.end(), m.params().begin()));

    cfg.max_episodes = 20;
    contexts = {{0, 1}};
    CHECK_THROWS_AS(rl_train(m, contexts, b.target, b.lookup, cfg), InputError);
  }

  TEST_CASE("reward log is reproducible and greedy baseline is logged") {
    Bandit b;
    RlConfig cfg = bandit_config();
    cfg.max_episodes = 60;
    cfg.ce_interval = 5;
    const std::vector<std::vector<int>> contexts = {{0}, {1}};
    Transformer m1 = Transformer::initialized(tiny_config(3), 18), m2 = m1;
    const auto r1 = rl_train(m1, contexts, b.target, b.lookup, cfg);
    const auto r2 = rl_train(m2, contexts, b.target, b.lookup, cfg);
    const std::string log = format_reward_log(r1.rows);
    CHECK(log == format_reward_log(r2.rows));
    CHECK(log.rfind(kRewardLogHeader, 0) == 0);
    CHECK(std::count(log.begin(), log.end(), '\n') == 11);

    cfg.baseline = BaselineMode::greedy_scst;
    Transformer m3 = Transformer::initialized(tiny_config(3), 18);
    const auto r3 = rl_train(m3, contexts, b.target, b.lookup, cfg);
    CHECK(r3.episodes == 60);
    for (const auto& row : r3.rows) {
      const bool known = std::abs(row.baseline - 20.0) < 1e-9 ||
                         std::abs(row.baseline - episode_reward(vec({}), b.target, 0.05)) < 1e-9;
      CHECK(known);
    }
  }

  TEST_CASE("lineage is enforced on checkpoints") {
    Bandit b;
    Checkpoint ck{Transformer::initialized(tiny_config(3), 1), Vocabulary(), Stage::pretrained, 1};
    RlConfig cfg = bandit_config();
    cfg.max_episodes = 12;
    const std::vector<std::vector<int>> contexts = {{0}};
    CHECK_THROWS_AS(rl_train(ck, contexts, b.target, b.lookup, cfg), LineageError);
    ck.stage = Stage::global_finetuned;
    rl_train(ck, contexts, b.target, b.lookup, cfg);
    CHECK(ck.stage == Stage::rl_tuned);
  }

  TEST_CASE("config validation") {
    RlConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    ModelConfig mc = tiny_config(5, 250);
    CHECK_THROWS_AS(cfg.validate(mc), InputError);
    cfg.episodes_per_context = 1;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg.baseline = BaselineMode::greedy_scst;
    CHECK_NOTHROW(cfg.validate());
    cfg.batch_contexts = 2;
    CHECK_THROWS_AS(cfg.validate(), InputError);
  }
}
