// SPDX-License-Identifier: Apache-2.0

#include "lexstyle/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lexstyle/error.hpp"
#include "lexstyle/kernels.hpp"
#include "nn_ops.hpp"

namespace lexstyle {

namespace k = kernels;

IncrementalDecoder::IncrementalDecoder(const Transformer& model, std::span<const int> prefix,
                                       int streams)
    : model_(&model), streams_(streams), prefix_len_(static_cast<int>(prefix.size())) {
  if (prefix.empty()) throw InputError("decoder needs a non-empty prefix");
  if (streams < 1) throw InputError("decoder needs at least one stream");
  const ModelConfig& cfg = model.config();
  const auto D = static_cast<std::size_t>(cfg.width);
  const auto V = static_cast<std::size_t>(cfg.vocab_size);

  PackedBatch batch;
  batch.add_sequence(prefix);
  const ForwardPass pass(model, batch);

  prefix_k_.resize(static_cast<std::size_t>(cfg.layers));
  prefix_v_.resize(static_cast<std::size_t>(cfg.layers));
  stream_k_.assign(static_cast<std::size_t>(cfg.layers),
                   std::vector<std::vector<double>>(static_cast<std::size_t>(streams)));
  stream_v_ = stream_k_;
  for (int l = 0; l < cfg.layers; ++l) {
    auto& kk = prefix_k_[static_cast<std::size_t>(l)];
    auto& vv = prefix_v_[static_cast<std::size_t>(l)];
    kk.reserve(prefix.size() * D);
    vv.reserve(prefix.size() * D);
    for (int r = 0; r < prefix_len_; ++r) {
      const auto key = pass.key(l, r);
      const auto val = pass.value(l, r);
      kk.insert(kk.end(), key.begin(), key.end());
      vv.insert(vv.end(), val.begin(), val.end());
    }
  }

  const auto last = pass.logits(prefix_len_ - 1);
  logits_.resize(static_cast<std::size_t>(streams) * V);
  lse_.resize(static_cast<std::size_t>(streams));
  const double lse = last[0] - pass.log_prob(prefix_len_ - 1, 0);
  for (int s = 0; s < streams; ++s) {
    std::copy(last.begin(), last.end(), logits_.begin() + static_cast<std::ptrdiff_t>(s) * static_cast<std::ptrdiff_t>(V));
    lse_[static_cast<std::size_t>(s)] = lse;
  }
}

std::span<const double> IncrementalDecoder::logits(int stream) const {
  const auto V = static_cast<std::size_t>(model_->config().vocab_size);
  return {&logits_[static_cast<std::size_t>(stream) * V], V};
}

std::vector<double> IncrementalDecoder::distribution(int stream) const {
  const auto lg = logits(stream);
  const double lse = lse_[static_cast<std::size_t>(stream)];
  std::vector<double> p(lg.size());
  for (std::size_t v = 0; v < lg.size(); ++v) p[v] = std::exp(lg[v] - lse);
  return p;
}

double IncrementalDecoder::log_prob(int stream, int token) const {
  return logits(stream)[static_cast<std::size_t>(token)] - lse_[static_cast<std::size_t>(stream)];
}

void IncrementalDecoder::advance(std::span<const int> tokens) {
  const ModelConfig& cfg = model_->config();
  if (static_cast<int>(tokens.size()) != streams_)
    throw InputError("decoder advance needs one token per stream");
  const int pos = prefix_len_ + steps_;
  if (pos >= cfg.max_seq_len)
    throw InputError("generation exceeds the model's maximum length (" +
                     std::to_string(cfg.max_seq_len) + ")");
  const ParamLayout& lay = model_->layout();
  const double* P = model_->params().data();
  const auto S = static_cast<std::size_t>(streams_);
  const auto D = static_cast<std::size_t>(cfg.width);
  const auto F = static_cast<std::size_t>(cfg.ffn_width);
  const auto H = static_cast<std::size_t>(cfg.heads);
  const std::size_t hd = D / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const auto n_prefix = static_cast<std::size_t>(prefix_len_);
  const auto n_own = static_cast<std::size_t>(steps_) + 1;

  std::vector<double> x(S * D);
  for (std::size_t s = 0; s < S; ++s) {
    const int tok = tokens[s];
    if (tok < 0 || tok >= cfg.vocab_size) throw InputError("token id outside the vocabulary");
    const double* te = P + lay.tok_emb + static_cast<std::size_t>(tok) * D;
    const double* pe = P + lay.pos_emb + static_cast<std::size_t>(pos) * D;
    for (std::size_t i = 0; i < D; ++i) x[s * D + i] = te[i] + pe[i];
  }

  std::vector<double> hat(S * D), ln(S * D), rstd(S), qkv(S * 3 * D), attn(S * D), h(S * F);
  std::vector<double> prob(n_prefix + n_own);
  for (std::size_t l = 0; l < prefix_k_.size(); ++l) {
    const auto& pl = lay.layers[l];
    for (std::size_t s = 0; s < S; ++s)
      detail::layer_norm_row(&x[s * D], P + pl.ln1_gain, P + pl.ln1_bias, &hat[s * D],
                             &ln[s * D], &rstd[s], D);
    for (std::size_t s = 0; s < S; ++s) std::copy_n(P + pl.b_qkv, 3 * D, &qkv[s * 3 * D]);
    k::gemm_nn(ln.data(), P + pl.w_qkv, qkv.data(), S, D, 3 * D);

    std::fill(attn.begin(), attn.end(), 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      auto& own_k = stream_k_[l][s];
      auto& own_v = stream_v_[l][s];
      own_k.insert(own_k.end(), &qkv[s * 3 * D + D], &qkv[s * 3 * D + 2 * D]);
      own_v.insert(own_v.end(), &qkv[s * 3 * D + 2 * D], &qkv[s * 3 * D + 3 * D]);
      for (std::size_t hh = 0; hh < H; ++hh) {
        const double* q = &qkv[s * 3 * D + hh * hd];
        const std::size_t nk = n_prefix + n_own;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < nk; ++j) {
          const double* key = j < n_prefix ? &prefix_k_[l][j * D + hh * hd]
                                           : &own_k[(j - n_prefix) * D + hh * hd];
          prob[j] = scale * k::dot(q, key, hd);
          mx = std::max(mx, prob[j]);
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < nk; ++j) {
          prob[j] = std::exp(prob[j] - mx);
          sum += prob[j];
        }
        const double inv = 1.0 / sum;
        double* out = &attn[s * D + hh * hd];
        for (std::size_t j = 0; j < nk; ++j) {
          const double* val = j < n_prefix ? &prefix_v_[l][j * D + hh * hd]
                                           : &own_v[(j - n_prefix) * D + hh * hd];
          k::axpy(prob[j] * inv, val, out, hd);
        }
      }
    }
    for (std::size_t s = 0; s < S; ++s) k::axpy(1.0, P + pl.b_proj, &x[s * D], D);
    k::gemm_nn(attn.data(), P + pl.w_proj, x.data(), S, D, D);

    for (std::size_t s = 0; s < S; ++s)
      detail::layer_norm_row(&x[s * D], P + pl.ln2_gain, P + pl.ln2_bias, &hat[s * D],
                             &ln[s * D], &rstd[s], D);
    for (std::size_t s = 0; s < S; ++s) std::copy_n(P + pl.b_fc1, F, &h[s * F]);
    k::gemm_nn(ln.data(), P + pl.w_fc1, h.data(), S, D, F);
    for (double& v : h) v = detail::gelu(v);
    for (std::size_t s = 0; s < S; ++s) k::axpy(1.0, P + pl.b_fc2, &x[s * D], D);
    k::gemm_nn(h.data(), P + pl.w_fc2, x.data(), S, F, D);
  }
  ++steps_;
  finish_logits(x);
}

void IncrementalDecoder::finish_logits(const std::vector<double>& x) {
  const ModelConfig& cfg = model_->config();
  const ParamLayout& lay = model_->layout();
  const double* P = model_->params().data();
  const auto S = static_cast<std::size_t>(streams_);
  const auto D = static_cast<std::size_t>(cfg.width);
  const auto V = static_cast<std::size_t>(cfg.vocab_size);
  std::vector<double> hat(S * D), ln(S * D), rstd(S);
  for (std::size_t s = 0; s < S; ++s)
    detail::layer_norm_row(&x[s * D], P + lay.lnf_gain, P + lay.lnf_bias, &hat[s * D], &ln[s * D],
                           &rstd[s], D);
  for (std::size_t s = 0; s < S; ++s) std::copy_n(P + lay.b_out, V, &logits_[s * V]);
  k::gemm_nn(ln.data(), P + lay.w_out, logits_.data(), S, D, V);
  for (std::size_t s = 0; s < S; ++s) {
    const double* row = &logits_[s * V];
    const double mx = *std::max_element(row, row + V);
    double sum = 0.0;
    for (std::size_t v = 0; v < V; ++v) sum += std::exp(row[v] - mx);
    lse_[s] = mx + std::log(sum);
  }
}

}  // namespace lexstyle
