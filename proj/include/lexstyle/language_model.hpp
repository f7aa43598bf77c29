// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lexstyle/transformer.hpp"

namespace lexstyle {

// P(next | prefix). The prefix must be non-empty and fit the model.
std::vector<double> next_token_distribution(const Transformer& model, std::span<const int> prefix);

// sum_i ln P(x_i | context, x_<i) over the continuation only.
double sequence_log_prob(const Transformer& model, std::span<const int> context,
                         std::span<const int> continuation);

// Gradient of sequence_log_prob with respect to every parameter.
std::vector<double> sequence_log_prob_gradient(const Transformer& model,
                                               std::span<const int> context,
                                               std::span<const int> continuation);

// Rescales grad to at most max_norm (if max_norm > 0) and applies
// params -= learning_rate * grad. Returns the norm before clipping.
double sgd_step(std::span<double> params, std::span<double> grad, double learning_rate,
                double max_norm);

struct ClmOptions {
  int epochs = 1;
  double learning_rate = 0.1;
  double clip_norm = 1.0;
  // Learning rate decays linearly to learning_rate * final_lr_fraction at the
  // last update.
  double final_lr_fraction = 1.0;
  int window = 320;        // predicted tokens per window
  int batch_windows = 1;   // windows per update
  std::uint64_t seed = 0;  // window order shuffle
};

struct ClmReport {
  std::vector<double> epoch_losses;  // mean next-token cross-entropy seen during each epoch
  std::size_t updates = 0;
};

// Next-token cross-entropy on non-overlapping windows of the token stream.
// Throws NumericError on a non-finite loss.
ClmReport clm_train(Transformer& model, std::span<const int> tokens, const ClmOptions& options);

// exp(mean NLL) over every predicted token (all but the first of each
// sequence). Returns +infinity if a realized token has probability zero.
double perplexity(const Transformer& model, std::span<const std::vector<int>> sequences);

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
};

// Central differences on sequence_log_prob for every parameter. The relative
// error is |a - n| / max(|a|, |n|, floor).
GradientCheckReport finite_difference_check(const Transformer& model, std::span<const int> context,
                                            std::span<const int> continuation, double step = 1e-4,
                                            double floor = 1e-6);

}  // namespace lexstyle
