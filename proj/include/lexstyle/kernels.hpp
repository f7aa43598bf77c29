// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string_view>

namespace lexstyle::kernels {

// Dense double-precision primitives behind the transformer. All matrices are
// row-major and every gemm accumulates into C (C += ...).
struct KernelTable {
  std::string_view name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // C[MxN] += A[MxK] * B[KxN]
  void (*gemm_nn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n);
  // C[MxN] += A[MxK] * B[NxK]^T
  void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n);
  // C[MxN] += A[KxM]^T * B[KxN]
  void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n);
};

const KernelTable& scalar_table();

// nullptr when the build lacks the variant or the CPU does not support it.
const KernelTable* avx2_table();

// Active table. Chosen once: LEXSTYLE_KERNELS=scalar|avx2 forces a variant,
// otherwise the widest supported one wins.
const KernelTable& active();

// Test hook; pass nullptr to restore automatic selection.
void set_active(const KernelTable* table);

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                    std::size_t n) {
  active().gemm_nn(a, b, c, m, k, n);
}
inline void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                    std::size_t n) {
  active().gemm_nt(a, b, c, m, k, n);
}
inline void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                    std::size_t n) {
  active().gemm_tn(a, b, c, m, k, n);
}

}  // namespace lexstyle::kernels
