// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "lexstyle/transformer.hpp"

namespace lexstyle {

// Key/value-cached generation of several streams that share one prefix. The
// prefix is run once; each stream then advances one token per step and
// attends to the prefix plus its own history, matching the row layout of
// PackedBatch::shared_prefix.
class IncrementalDecoder {
 public:
  IncrementalDecoder(const Transformer& model, std::span<const int> prefix, int streams);

  int streams() const { return streams_; }
  // Tokens generated so far per stream.
  int steps() const { return steps_; }

  // Next-token logits / probabilities of a stream.
  std::span<const double> logits(int stream) const;
  std::vector<double> distribution(int stream) const;
  double log_prob(int stream, int token) const;

  // Appends one token to every stream.
  void advance(std::span<const int> tokens);

 private:
  void finish_logits(const std::vector<double>& x);

  const Transformer* model_;
  int streams_;
  int prefix_len_;
  int steps_ = 0;
  std::vector<std::vector<double>> prefix_k_, prefix_v_;               // [layer] P x D
  std::vector<std::vector<std::vector<double>>> stream_k_, stream_v_;  // [layer][stream] t x D
  std::vector<double> logits_;                                         // streams x V
  std::vector<double> lse_;
};

}  // namespace lexstyle
