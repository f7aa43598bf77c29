// SPDX-License-Identifier: Apache-2.0

#include "lexstyle/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lexstyle/error.hpp"
#include "lexstyle/kernels.hpp"
#include "lexstyle/rng.hpp"
#include "nn_ops.hpp"

namespace lexstyle {

namespace k = kernels;
using detail::gelu;
using detail::gelu_grad;
using detail::layer_norm_row;
using detail::layer_norm_row_backward;

void ModelConfig::validate() const {
  if (norm != NormPlacement::pre)
    throw InputError("only pre-norm transformers are supported (post-norm config rejected)");
  if (vocab_size < 2) throw InputError("model vocabulary must hold at least 2 tokens");
  if (layers < 1 || heads < 1 || width < 1 || ffn_width < 1 || max_seq_len < 1)
    throw InputError("model dimensions must be positive");
  if (width % heads != 0) throw InputError("width must be divisible by the head count");
}

ParamLayout::ParamLayout(const ModelConfig& cfg) {
  cfg.validate();
  const auto V = static_cast<std::size_t>(cfg.vocab_size);
  const auto D = static_cast<std::size_t>(cfg.width);
  const auto F = static_cast<std::size_t>(cfg.ffn_width);
  const auto L = static_cast<std::size_t>(cfg.max_seq_len);
  auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
    tensors.push_back({std::move(name), total, rows, cols});
    total += rows * cols;
    return tensors.back().offset;
  };
  tok_emb = add("tok_emb", V, D);
  pos_emb = add("pos_emb", L, D);
  for (int l = 0; l < cfg.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    Layer layer{};
    layer.ln1_gain = add(p + "ln1.gain", 1, D);
    layer.ln1_bias = add(p + "ln1.bias", 1, D);
    layer.w_qkv = add(p + "attn.w_qkv", D, 3 * D);
    layer.b_qkv = add(p + "attn.b_qkv", 1, 3 * D);
    layer.w_proj = add(p + "attn.w_proj", D, D);
    layer.b_proj = add(p + "attn.b_proj", 1, D);
    layer.ln2_gain = add(p + "ln2.gain", 1, D);
    layer.ln2_bias = add(p + "ln2.bias", 1, D);
    layer.w_fc1 = add(p + "mlp.w_fc1", D, F);
    layer.b_fc1 = add(p + "mlp.b_fc1", 1, F);
    layer.w_fc2 = add(p + "mlp.w_fc2", F, D);
    layer.b_fc2 = add(p + "mlp.b_fc2", 1, D);
    layers.push_back(layer);
  }
  lnf_gain = add("lnf.gain", 1, D);
  lnf_bias = add("lnf.bias", 1, D);
  w_out = add("head.w_out", D, V);
  b_out = add("head.b_out", 1, V);
}

Transformer::Transformer(const ModelConfig& cfg)
    : cfg_(cfg), layout_(cfg), params_(layout_.total, 0.0) {
  const auto D = static_cast<std::size_t>(cfg_.width);
  auto ones = [&](std::size_t off) { std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(off), D, 1.0); };
  for (const auto& layer : layout_.layers) {
    ones(layer.ln1_gain);
    ones(layer.ln2_gain);
  }
  ones(layout_.lnf_gain);
}

Transformer Transformer::initialized(const ModelConfig& cfg, std::uint64_t seed) {
  Transformer m(cfg);
  Rng rng(seed);
  const double std_base = 0.1;
  const double std_resid = std_base / std::sqrt(2.0 * cfg.layers);
  auto fill = [&](std::size_t off, std::size_t n, double sd) {
    for (std::size_t i = 0; i < n; ++i) m.params_[off + i] = rng.normal(0.0, sd);
  };
  for (const auto& t : m.layout_.tensors) {
    const bool is_vector = t.rows == 1;
    if (is_vector) continue;  // biases zero, gains one
    const bool resid = t.name.ends_with("w_proj") || t.name.ends_with("w_fc2");
    fill(t.offset, t.size(), resid ? std_resid : std_base);
  }
  return m;
}

// ---------------------------------------------------------------------------

int PackedBatch::add_sequence(std::span<const int> sequence) {
  const int first = static_cast<int>(tokens.size());
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    tokens.push_back(sequence[i]);
    positions.push_back(static_cast<int>(i));
    prefix_len.push_back(0);
    seg_start.push_back(first);
  }
  return first;
}

PackedBatch PackedBatch::shared_prefix(std::span<const int> context,
                                       std::span<const std::vector<int>> continuations,
                                       std::vector<int>* first_rows) {
  PackedBatch b;
  b.add_sequence(context);
  const int n_ctx = static_cast<int>(context.size());
  if (first_rows) first_rows->clear();
  for (const auto& cont : continuations) {
    const int first = static_cast<int>(b.tokens.size());
    if (first_rows) first_rows->push_back(first);
    for (std::size_t i = 0; i < cont.size(); ++i) {
      b.tokens.push_back(cont[i]);
      b.positions.push_back(n_ctx + static_cast<int>(i));
      b.prefix_len.push_back(n_ctx);
      b.seg_start.push_back(first);
    }
  }
  return b;
}

void PackedBatch::validate(const ModelConfig& cfg) const {
  const std::size_t n = tokens.size();
  if (n == 0) throw InputError("empty batch");
  if (positions.size() != n || prefix_len.size() != n || seg_start.size() != n)
    throw InputError("packed batch arrays disagree in length");
  for (std::size_t r = 0; r < n; ++r) {
    if (tokens[r] < 0 || tokens[r] >= cfg.vocab_size)
      throw InputError("token id " + std::to_string(tokens[r]) + " outside the vocabulary");
    if (positions[r] < 0 || positions[r] >= cfg.max_seq_len)
      throw InputError("sequence longer than the model's maximum length (" +
                       std::to_string(cfg.max_seq_len) + ")");
    if (seg_start[r] < 0 || seg_start[r] > static_cast<int>(r) || prefix_len[r] < 0 ||
        prefix_len[r] > seg_start[r])
      throw InputError("packed batch attention ranges are inconsistent");
  }
}

// ---------------------------------------------------------------------------

std::size_t ForwardPass::key_count(std::size_t r) const {
  return static_cast<std::size_t>(batch_.prefix_len[r]) + r -
         static_cast<std::size_t>(batch_.seg_start[r]) + 1;
}

ForwardPass::ForwardPass(const Transformer& model, const PackedBatch& batch)
    : model_(&model), batch_(batch), rows_(batch.rows()) {
  const ModelConfig& cfg = model.config();
  batch_.validate(cfg);
  const ParamLayout& lay = model.layout();
  const double* P = model.params().data();
  const std::size_t R = rows_;
  const auto D = static_cast<std::size_t>(cfg.width);
  const auto F = static_cast<std::size_t>(cfg.ffn_width);
  const auto V = static_cast<std::size_t>(cfg.vocab_size);
  const auto H = static_cast<std::size_t>(cfg.heads);
  const std::size_t hd = D / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  attn_offset_.resize(R);
  attn_block_ = 0;
  for (std::size_t r = 0; r < R; ++r) {
    attn_offset_[r] = attn_block_;
    attn_block_ += key_count(r);
  }

  std::vector<double> x(R * D);
  for (std::size_t r = 0; r < R; ++r) {
    const double* te = P + lay.tok_emb + static_cast<std::size_t>(batch_.tokens[r]) * D;
    const double* pe = P + lay.pos_emb + static_cast<std::size_t>(batch_.positions[r]) * D;
    for (std::size_t i = 0; i < D; ++i) x[r * D + i] = te[i] + pe[i];
  }

  acts_.resize(static_cast<std::size_t>(cfg.layers));
  for (std::size_t l = 0; l < acts_.size(); ++l) {
    const auto& pl = lay.layers[l];
    LayerActs& a = acts_[l];
    a.ln1_hat.resize(R * D);
    a.ln1_out.resize(R * D);
    a.ln1_rstd.resize(R);
    for (std::size_t r = 0; r < R; ++r)
      layer_norm_row(&x[r * D], P + pl.ln1_gain, P + pl.ln1_bias, &a.ln1_hat[r * D],
                     &a.ln1_out[r * D], &a.ln1_rstd[r], D);

    a.qkv.resize(R * 3 * D);
    for (std::size_t r = 0; r < R; ++r) std::copy_n(P + pl.b_qkv, 3 * D, &a.qkv[r * 3 * D]);
    k::gemm_nn(a.ln1_out.data(), P + pl.w_qkv, a.qkv.data(), R, D, 3 * D);

    a.attn.assign(H * attn_block_, 0.0);
    a.attn_out.assign(R * D, 0.0);
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t r = 0; r < R; ++r) {
        const double* q = &a.qkv[r * 3 * D + h * hd];
        const std::size_t n_prefix = static_cast<std::size_t>(batch_.prefix_len[r]);
        const std::size_t seg = static_cast<std::size_t>(batch_.seg_start[r]);
        const std::size_t nk = key_count(r);
        double* prob = &a.attn[h * attn_block_ + attn_offset_[r]];
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < nk; ++j) {
          const std::size_t key_row = j < n_prefix ? j : seg + (j - n_prefix);
          prob[j] = scale * k::dot(q, &a.qkv[key_row * 3 * D + D + h * hd], hd);
          mx = std::max(mx, prob[j]);
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < nk; ++j) {
          prob[j] = std::exp(prob[j] - mx);
          sum += prob[j];
        }
        const double inv = 1.0 / sum;
        double* out = &a.attn_out[r * D + h * hd];
        for (std::size_t j = 0; j < nk; ++j) {
          prob[j] *= inv;
          const std::size_t key_row = j < n_prefix ? j : seg + (j - n_prefix);
          k::axpy(prob[j], &a.qkv[key_row * 3 * D + 2 * D + h * hd], out, hd);
        }
      }
    }

    a.x_mid = x;
    for (std::size_t r = 0; r < R; ++r) k::axpy(1.0, P + pl.b_proj, &a.x_mid[r * D], D);
    k::gemm_nn(a.attn_out.data(), P + pl.w_proj, a.x_mid.data(), R, D, D);

    a.ln2_hat.resize(R * D);
    a.ln2_out.resize(R * D);
    a.ln2_rstd.resize(R);
    for (std::size_t r = 0; r < R; ++r)
      layer_norm_row(&a.x_mid[r * D], P + pl.ln2_gain, P + pl.ln2_bias, &a.ln2_hat[r * D],
                     &a.ln2_out[r * D], &a.ln2_rstd[r], D);

    a.h_pre.resize(R * F);
    for (std::size_t r = 0; r < R; ++r) std::copy_n(P + pl.b_fc1, F, &a.h_pre[r * F]);
    k::gemm_nn(a.ln2_out.data(), P + pl.w_fc1, a.h_pre.data(), R, D, F);
    a.h_act.resize(R * F);
    for (std::size_t i = 0; i < R * F; ++i) a.h_act[i] = gelu(a.h_pre[i]);

    x = a.x_mid;
    for (std::size_t r = 0; r < R; ++r) k::axpy(1.0, P + lay.layers[l].b_fc2, &x[r * D], D);
    k::gemm_nn(a.h_act.data(), P + pl.w_fc2, x.data(), R, F, D);
  }

  x_final_ = std::move(x);
  lnf_hat_.resize(R * D);
  lnf_out_.resize(R * D);
  lnf_rstd_.resize(R);
  for (std::size_t r = 0; r < R; ++r)
    layer_norm_row(&x_final_[r * D], P + lay.lnf_gain, P + lay.lnf_bias, &lnf_hat_[r * D],
                   &lnf_out_[r * D], &lnf_rstd_[r], D);

  logits_.resize(R * V);
  for (std::size_t r = 0; r < R; ++r) std::copy_n(P + lay.b_out, V, &logits_[r * V]);
  k::gemm_nn(lnf_out_.data(), P + lay.w_out, logits_.data(), R, D, V);

  lse_.resize(R);
  for (std::size_t r = 0; r < R; ++r) {
    const double* row = &logits_[r * V];
    const double mx = *std::max_element(row, row + V);
    double sum = 0.0;
    for (std::size_t v = 0; v < V; ++v) sum += std::exp(row[v] - mx);
    lse_[r] = mx + std::log(sum);
  }
}

double ForwardPass::log_prob(int row, int target) const {
  const auto V = static_cast<std::size_t>(model_->config().vocab_size);
  return logits_[static_cast<std::size_t>(row) * V + static_cast<std::size_t>(target)] -
         lse_[static_cast<std::size_t>(row)];
}

std::span<const double> ForwardPass::logits(int row) const {
  const auto V = static_cast<std::size_t>(model_->config().vocab_size);
  return {&logits_[static_cast<std::size_t>(row) * V], V};
}

std::vector<double> ForwardPass::distribution(int row) const {
  const auto lg = logits(row);
  std::vector<double> p(lg.size());
  const double lse = lse_[static_cast<std::size_t>(row)];
  for (std::size_t v = 0; v < lg.size(); ++v) p[v] = std::exp(lg[v] - lse);
  return p;
}

std::span<const double> ForwardPass::key(int layer, int row) const {
  const auto D = static_cast<std::size_t>(model_->config().width);
  return {&acts_[static_cast<std::size_t>(layer)].qkv[static_cast<std::size_t>(row) * 3 * D + D], D};
}

std::span<const double> ForwardPass::value(int layer, int row) const {
  const auto D = static_cast<std::size_t>(model_->config().width);
  return {&acts_[static_cast<std::size_t>(layer)].qkv[static_cast<std::size_t>(row) * 3 * D + 2 * D],
          D};
}

double ForwardPass::loss(std::span<const LossTerm> terms) const {
  double total = 0.0;
  for (const LossTerm& t : terms)
    if (t.weight != 0.0) total -= t.weight * log_prob(t.row, t.target);
  return total;
}

void ForwardPass::backward(std::span<const LossTerm> terms, std::span<double> grad) const {
  const ModelConfig& cfg = model_->config();
  const ParamLayout& lay = model_->layout();
  if (grad.size() != lay.total) throw InputError("gradient buffer has the wrong size");
  const double* P = model_->params().data();
  double* G = grad.data();
  const std::size_t R = rows_;
  const auto D = static_cast<std::size_t>(cfg.width);
  const auto F = static_cast<std::size_t>(cfg.ffn_width);
  const auto V = static_cast<std::size_t>(cfg.vocab_size);
  const auto H = static_cast<std::size_t>(cfg.heads);
  const std::size_t hd = D / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  // d(-w log p_t)/d logits = w (p - onehot(t))
  std::vector<double> dlogits(R * V, 0.0);
  for (const LossTerm& t : terms) {
    if (t.weight == 0.0) continue;
    const auto r = static_cast<std::size_t>(t.row);
    const double* lg = &logits_[r * V];
    double* d = &dlogits[r * V];
    for (std::size_t v = 0; v < V; ++v) d[v] += t.weight * std::exp(lg[v] - lse_[r]);
    d[static_cast<std::size_t>(t.target)] -= t.weight;
  }

  auto column_sums = [](const double* m, std::size_t rows, std::size_t cols, double* out) {
    for (std::size_t r = 0; r < rows; ++r) kernels::axpy(1.0, m + r * cols, out, cols);
  };

  k::gemm_tn(lnf_out_.data(), dlogits.data(), G + lay.w_out, D, R, V);
  column_sums(dlogits.data(), R, V, G + lay.b_out);
  std::vector<double> dln(R * D, 0.0);
  k::gemm_nt(dlogits.data(), P + lay.w_out, dln.data(), R, V, D);

  std::vector<double> dx(R * D, 0.0);
  for (std::size_t r = 0; r < R; ++r)
    layer_norm_row_backward(&dln[r * D], &lnf_hat_[r * D], lnf_rstd_[r], P + lay.lnf_gain,
                            G + lay.lnf_gain, G + lay.lnf_bias, &dx[r * D], D);

  std::vector<double> dh(R * F), dmid(R * D), dattn(R * D), dqkv(R * 3 * D);
  for (std::size_t li = acts_.size(); li-- > 0;) {
    const auto& pl = lay.layers[li];
    const LayerActs& a = acts_[li];

    // MLP
    k::gemm_tn(a.h_act.data(), dx.data(), G + pl.w_fc2, F, R, D);
    column_sums(dx.data(), R, D, G + pl.b_fc2);
    std::fill(dh.begin(), dh.end(), 0.0);
    k::gemm_nt(dx.data(), P + pl.w_fc2, dh.data(), R, D, F);
    for (std::size_t i = 0; i < R * F; ++i) dh[i] *= gelu_grad(a.h_pre[i]);
    k::gemm_tn(a.ln2_out.data(), dh.data(), G + pl.w_fc1, D, R, F);
    column_sums(dh.data(), R, F, G + pl.b_fc1);
    std::fill(dln.begin(), dln.end(), 0.0);
    k::gemm_nt(dh.data(), P + pl.w_fc1, dln.data(), R, F, D);
    dmid = dx;
    for (std::size_t r = 0; r < R; ++r)
      layer_norm_row_backward(&dln[r * D], &a.ln2_hat[r * D], a.ln2_rstd[r], P + pl.ln2_gain,
                              G + pl.ln2_gain, G + pl.ln2_bias, &dmid[r * D], D);

    // Attention output projection
    k::gemm_tn(a.attn_out.data(), dmid.data(), G + pl.w_proj, D, R, D);
    column_sums(dmid.data(), R, D, G + pl.b_proj);
    std::fill(dattn.begin(), dattn.end(), 0.0);
    k::gemm_nt(dmid.data(), P + pl.w_proj, dattn.data(), R, D, D);

    // Attention core
    std::fill(dqkv.begin(), dqkv.end(), 0.0);
    std::vector<double> dprob;
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t r = 0; r < R; ++r) {
        const std::size_t n_prefix = static_cast<std::size_t>(batch_.prefix_len[r]);
        const std::size_t seg = static_cast<std::size_t>(batch_.seg_start[r]);
        const std::size_t nk = key_count(r);
        const double* prob = &a.attn[h * attn_block_ + attn_offset_[r]];
        const double* dout = &dattn[r * D + h * hd];
        dprob.resize(nk);
        double weighted = 0.0;
        for (std::size_t j = 0; j < nk; ++j) {
          const std::size_t key_row = j < n_prefix ? j : seg + (j - n_prefix);
          dprob[j] = k::dot(dout, &a.qkv[key_row * 3 * D + 2 * D + h * hd], hd);
          weighted += prob[j] * dprob[j];
          k::axpy(prob[j], dout, &dqkv[key_row * 3 * D + 2 * D + h * hd], hd);
        }
        const double* q = &a.qkv[r * 3 * D + h * hd];
        double* dq = &dqkv[r * 3 * D + h * hd];
        for (std::size_t j = 0; j < nk; ++j) {
          const double ds = prob[j] * (dprob[j] - weighted) * scale;
          if (ds == 0.0) continue;
          const std::size_t key_row = j < n_prefix ? j : seg + (j - n_prefix);
          k::axpy(ds, &a.qkv[key_row * 3 * D + D + h * hd], dq, hd);
          k::axpy(ds, q, &dqkv[key_row * 3 * D + D + h * hd], hd);
        }
      }
    }

    k::gemm_tn(a.ln1_out.data(), dqkv.data(), G + pl.w_qkv, D, R, 3 * D);
    column_sums(dqkv.data(), R, 3 * D, G + pl.b_qkv);
    std::fill(dln.begin(), dln.end(), 0.0);
    k::gemm_nt(dqkv.data(), P + pl.w_qkv, dln.data(), R, 3 * D, D);
    dx = dmid;
    for (std::size_t r = 0; r < R; ++r)
      layer_norm_row_backward(&dln[r * D], &a.ln1_hat[r * D], a.ln1_rstd[r], P + pl.ln1_gain,
                              G + pl.ln1_gain, G + pl.ln1_bias, &dx[r * D], D);
  }

  for (std::size_t r = 0; r < R; ++r) {
    k::axpy(1.0, &dx[r * D], G + lay.tok_emb + static_cast<std::size_t>(batch_.tokens[r]) * D, D);
    k::axpy(1.0, &dx[r * D], G + lay.pos_emb + static_cast<std::size_t>(batch_.positions[r]) * D,
            D);
  }
}

}  // namespace lexstyle
