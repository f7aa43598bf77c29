// SPDX-License-Identifier: Apache-2.0

#include "lexstyle/language_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lexstyle/error.hpp"
#include "lexstyle/rng.hpp"

namespace lexstyle {

namespace {

struct ContinuationBatch {
  PackedBatch batch;
  std::vector<LossTerm> terms;
};

ContinuationBatch continuation_batch(std::span<const int> context,
                                     std::span<const int> continuation) {
  if (context.empty()) throw InputError("context must hold at least one token");
  if (continuation.empty()) throw InputError("continuation is empty");
  ContinuationBatch cb;
  std::vector<int> joined(context.begin(), context.end());
  joined.insert(joined.end(), continuation.begin(), continuation.end());
  cb.batch.add_sequence(joined);
  const int n_ctx = static_cast<int>(context.size());
  for (std::size_t i = 0; i < continuation.size(); ++i)
    cb.terms.push_back({n_ctx - 1 + static_cast<int>(i), continuation[i], 1.0});
  return cb;
}

}  // namespace

std::vector<double> next_token_distribution(const Transformer& model,
                                            std::span<const int> prefix) {
  if (prefix.empty()) throw InputError("prefix must hold at least one token");
  if (prefix.size() > static_cast<std::size_t>(model.config().max_seq_len))
    throw InputError("prefix longer than the model's maximum length");
  PackedBatch batch;
  batch.add_sequence(prefix);
  const ForwardPass pass(model, batch);
  return pass.distribution(static_cast<int>(prefix.size()) - 1);
}

double sequence_log_prob(const Transformer& model, std::span<const int> context,
                         std::span<const int> continuation) {
  const ContinuationBatch cb = continuation_batch(context, continuation);
  const ForwardPass pass(model, cb.batch);
  return -pass.loss(cb.terms);
}

std::vector<double> sequence_log_prob_gradient(const Transformer& model,
                                               std::span<const int> context,
                                               std::span<const int> continuation) {
  ContinuationBatch cb = continuation_batch(context, continuation);
  for (LossTerm& t : cb.terms) t.weight = -1.0;  // loss = -(-log p) = log p
  const ForwardPass pass(model, cb.batch);
  std::vector<double> grad(model.layout().total, 0.0);
  pass.backward(cb.terms, grad);
  return grad;
}

double sgd_step(std::span<double> params, std::span<double> grad, double learning_rate,
                double max_norm) {
  if (params.size() != grad.size()) throw InputError("parameter/gradient size mismatch");
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm");
  double factor = 1.0;
  if (max_norm > 0.0 && norm > max_norm) factor = max_norm / norm;
  const double step = learning_rate * factor;
  if (step != 0.0)
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= step * grad[i];
  return norm;
}

ClmReport clm_train(Transformer& model, std::span<const int> tokens, const ClmOptions& options) {
  if (tokens.size() < 2) throw InputError("CLM corpus needs at least 2 tokens");
  if (options.window < 1 || options.batch_windows < 1 || options.epochs < 0 ||
      options.final_lr_fraction < 0.0)
    throw InputError("invalid CLM options");
  const int max_window = model.config().max_seq_len - 1;
  const auto window = static_cast<std::size_t>(std::min(options.window, max_window));

  // Window w covers tokens [w*window, w*window + window] (window predictions).
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + 1 < tokens.size(); s += window) starts.push_back(s);

  const std::size_t per_epoch =
      (starts.size() + static_cast<std::size_t>(options.batch_windows) - 1) /
      static_cast<std::size_t>(options.batch_windows);
  const std::size_t total_updates = per_epoch * static_cast<std::size_t>(options.epochs);

  ClmReport report;
  Rng rng(options.seed);
  std::vector<double> grad(model.layout().total);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::vector<std::size_t> order = starts;
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t predicted = 0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(options.batch_windows)) {
      PackedBatch batch;
      std::vector<LossTerm> terms;
      const std::size_t end = std::min(order.size(), b + static_cast<std::size_t>(options.batch_windows));
      std::size_t batch_predictions = 0;
      for (std::size_t w = b; w < end; ++w) {
        const std::size_t s = order[w];
        const std::size_t len = std::min(window + 1, tokens.size() - s);
        const int first = batch.add_sequence(tokens.subspan(s, len));
        for (std::size_t i = 0; i + 1 < len; ++i)
          terms.push_back({first + static_cast<int>(i), tokens[s + i + 1], 1.0});
        batch_predictions += len - 1;
      }
      for (LossTerm& t : terms) t.weight = 1.0 / static_cast<double>(batch_predictions);
      const ForwardPass pass(model, batch);
      const double loss = pass.loss(terms);
      if (!std::isfinite(loss))
        throw NumericError("non-finite CLM loss at epoch " + std::to_string(epoch));
      loss_sum += loss * static_cast<double>(batch_predictions);
      predicted += batch_predictions;
      std::fill(grad.begin(), grad.end(), 0.0);
      pass.backward(terms, grad);
      const double progress =
          total_updates > 1 ? static_cast<double>(report.updates) / static_cast<double>(total_updates - 1)
                            : 0.0;
      const double lr =
          options.learning_rate * (1.0 - (1.0 - options.final_lr_fraction) * progress);
      sgd_step(model.params(), grad, lr, options.clip_norm);
      ++report.updates;
    }
    report.epoch_losses.push_back(loss_sum / static_cast<double>(predicted));
  }
  return report;
}

double perplexity(const Transformer& model, std::span<const std::vector<int>> sequences) {
  if (sequences.empty()) throw InputError("perplexity needs at least one sequence");
  double nll = 0.0;
  std::size_t count = 0;
  for (const auto& seq : sequences) {
    if (seq.size() < 2) continue;
    PackedBatch batch;
    batch.add_sequence(seq);
    const ForwardPass pass(model, batch);
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      const double lp = pass.log_prob(static_cast<int>(i), seq[i + 1]);
      if (!std::isfinite(lp)) return std::numeric_limits<double>::infinity();
      nll -= lp;
      ++count;
    }
  }
  if (count == 0) throw InputError("perplexity needs a sequence with at least 2 tokens");
  return std::exp(nll / static_cast<double>(count));
}

GradientCheckReport finite_difference_check(const Transformer& model, std::span<const int> context,
                                            std::span<const int> continuation, double step,
                                            double floor) {
  const std::vector<double> analytic = sequence_log_prob_gradient(model, context, continuation);
  Transformer probe = model;
  auto params = probe.params();
  GradientCheckReport report;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + step;
    const double up = sequence_log_prob(probe, context, continuation);
    params[i] = saved - step;
    const double down = sequence_log_prob(probe, context, continuation);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (i == 0 || rel > report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_index = i;
      report.analytic_at_worst = analytic[i];
      report.numeric_at_worst = numeric;
    }
  }
  return report;
}

}  // namespace lexstyle
