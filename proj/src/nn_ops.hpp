// SPDX-License-Identifier: Apache-2.0
// Row-wise building blocks shared by the batched pass and the decoder.
#pragma once

#include <cmath>
#include <cstddef>

namespace lexstyle::detail {

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)

// y = gain * xhat + bias; stores xhat and 1/sigma.
inline void layer_norm_row(const double* x, const double* gain, const double* bias, double* hat,
                           double* out, double* rstd, std::size_t d) {
  double mean = 0.0;
  for (std::size_t i = 0; i < d; ++i) mean += x[i];
  mean /= static_cast<double>(d);
  double var = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double c = x[i] - mean;
    var += c * c;
  }
  var /= static_cast<double>(d);
  const double r = 1.0 / std::sqrt(var + kLayerNormEps);
  *rstd = r;
  for (std::size_t i = 0; i < d; ++i) {
    hat[i] = (x[i] - mean) * r;
    out[i] = gain[i] * hat[i] + bias[i];
  }
}

// Accumulates parameter grads and adds the input grad into dx.
inline void layer_norm_row_backward(const double* dy, const double* hat, double rstd,
                                    const double* gain, double* dgain, double* dbias, double* dx,
                                    std::size_t d) {
  double mean_dhat = 0.0, mean_dhat_hat = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double dh = dy[i] * gain[i];
    mean_dhat += dh;
    mean_dhat_hat += dh * hat[i];
    dgain[i] += dy[i] * hat[i];
    dbias[i] += dy[i];
  }
  mean_dhat /= static_cast<double>(d);
  mean_dhat_hat /= static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i)
    dx[i] += rstd * (dy[i] * gain[i] - mean_dhat - hat[i] * mean_dhat_hat);
}

inline double gelu(double x) {
  return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + 0.044715 * x * x * x)));
}

inline double gelu_grad(double x) {
  const double t = std::tanh(kGeluC * (x + 0.044715 * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
}

}  // namespace lexstyle::detail
