// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lexstyle {

enum class NormPlacement { pre, post };

struct ModelConfig {
  int vocab_size = 0;
  int layers = 2;
  int heads = 2;
  int width = 64;
  int ffn_width = 256;
  int max_seq_len = 384;
  // Only pre-norm (normalization on each sublayer's input stream) is
  // supported; validate() rejects anything else.
  NormPlacement norm = NormPlacement::pre;

  void validate() const;
  int head_dim() const { return width / heads; }
};

// Offsets of every tensor inside the flat parameter vector, in declared order.
struct ParamLayout {
  struct Tensor {
    std::string name;
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t size() const { return rows * cols; }
  };
  struct Layer {
    std::size_t ln1_gain, ln1_bias, w_qkv, b_qkv, w_proj, b_proj;
    std::size_t ln2_gain, ln2_bias, w_fc1, b_fc1, w_fc2, b_fc2;
  };

  explicit ParamLayout(const ModelConfig& cfg);

  std::size_t tok_emb = 0, pos_emb = 0;
  std::vector<Layer> layers;
  std::size_t lnf_gain = 0, lnf_bias = 0, w_out = 0, b_out = 0;
  std::size_t total = 0;
  std::vector<Tensor> tensors;
};

// Decoder-only transformer. Parameters live in one flat vector so optimizers,
// gradient checks and checkpoints treat them uniformly.
class Transformer {
 public:
  // All parameters zero (layer-norm gains one).
  explicit Transformer(const ModelConfig& cfg);
  // Weights N(0, 0.1), residual projections scaled by 1/sqrt(2L); biases zero.
  static Transformer initialized(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

 private:
  ModelConfig cfg_;
  ParamLayout layout_;
  std::vector<double> params_;
};

// Rows of one forward pass. Row r attends to keys [0, prefix_len[r]) and
// [seg_start[r], r]. A plain sequence uses prefix_len 0 and seg_start 0;
// several continuations of one shared context reuse the context rows as prefix.
struct PackedBatch {
  std::vector<int> tokens;
  std::vector<int> positions;
  std::vector<int> prefix_len;
  std::vector<int> seg_start;

  std::size_t rows() const { return tokens.size(); }

  // Appends an independent sequence; returns its first row.
  int add_sequence(std::span<const int> sequence);

  // Context rows followed by each continuation (positions continue after the
  // context). first_rows receives the first row of every continuation.
  static PackedBatch shared_prefix(std::span<const int> context,
                                   std::span<const std::vector<int>> continuations,
                                   std::vector<int>* first_rows = nullptr);

  void validate(const ModelConfig& cfg) const;
};

// Loss contribution -weight * log p(target | row).
struct LossTerm {
  int row = 0;
  int target = 0;
  double weight = 0.0;
};

// Forward activations of one PackedBatch, kept for the backward pass.
class ForwardPass {
 public:
  ForwardPass(const Transformer& model, const PackedBatch& batch);

  std::size_t rows() const { return rows_; }
  double log_prob(int row, int target) const;
  std::span<const double> logits(int row) const;
  std::vector<double> distribution(int row) const;

  // sum_t -weight_t * log p(target_t | row_t)
  double loss(std::span<const LossTerm> terms) const;
  // Accumulates d loss / d params into grad (same layout as params).
  void backward(std::span<const LossTerm> terms, std::span<double> grad) const;

  // Keys/values of one layer for row r (head-concatenated, width wide).
  std::span<const double> key(int layer, int row) const;
  std::span<const double> value(int layer, int row) const;

 private:
  struct LayerActs {
    std::vector<double> ln1_hat, ln1_out, ln1_rstd, qkv, attn, attn_out;
    std::vector<double> x_mid, ln2_hat, ln2_out, ln2_rstd, h_pre, h_act;
  };

  std::size_t key_count(std::size_t r) const;

  const Transformer* model_;  // must outlive the pass and stay unmodified
  PackedBatch batch_;
  std::size_t rows_;
  std::vector<std::size_t> attn_offset_;  // per row, into a head's probability block
  std::size_t attn_block_ = 0;            // probabilities per head
  std::vector<LayerActs> acts_;
  std::vector<double> x_final_, lnf_hat_, lnf_out_, lnf_rstd_, logits_, lse_;
};

}  // namespace lexstyle
