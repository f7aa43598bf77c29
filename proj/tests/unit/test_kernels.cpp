// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lexstyle/kernels.hpp"
#include "lexstyle/rng.hpp"

using namespace lexstyle;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(std::abs(a[i] - b[i]) <= 1e-12 * std::max(1.0, std::abs(a[i])));
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar kernels against naive loops") {
    const auto& s = kernels::scalar_table();
    Rng rng(1);
    const std::size_t m = 5, k = 7, n = 3;
    const auto a = random_vec(rng, m * k), b = random_vec(rng, k * n), bt = random_vec(rng, n * k),
               at = random_vec(rng, k * m);
    std::vector<double> c(m * n, 1.0), ref(m * n, 1.0);
    s.gemm_nn(a.data(), b.data(), c.data(), m, k, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t p = 0; p < k; ++p) ref[i * n + j] += a[i * k + p] * b[p * n + j];
    check_close(c, ref);

    std::fill(c.begin(), c.end(), 0.0);
    std::fill(ref.begin(), ref.end(), 0.0);
    s.gemm_nt(a.data(), bt.data(), c.data(), m, k, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t p = 0; p < k; ++p) ref[i * n + j] += a[i * k + p] * bt[j * k + p];
    check_close(c, ref);

    std::fill(c.begin(), c.end(), 0.0);
    std::fill(ref.begin(), ref.end(), 0.0);
    s.gemm_tn(at.data(), b.data(), c.data(), m, k, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t p = 0; p < k; ++p) ref[i * n + j] += at[p * m + i] * b[p * n + j];
    check_close(c, ref);

    double d = 0.0;
    for (std::size_t i = 0; i < k; ++i) d += a[i] * b[i];
    CHECK(s.dot(a.data(), b.data(), k) == doctest::Approx(d).epsilon(1e-14));
  }

  TEST_CASE("avx2 kernels match scalar kernels") {
    const kernels::KernelTable* v = kernels::avx2_table();
    if (v == nullptr) {
      MESSAGE("AVX2 variant unavailable on this build or CPU; equivalence not exercised");
      return;
    }
    const auto& s = kernels::scalar_table();
    Rng rng(2);
    for (int trial = 0; trial < 60; ++trial) {
      const std::size_t m = 1 + rng.below(20), k = 1 + rng.below(70), n = 1 + rng.below(40);
      const auto a = random_vec(rng, m * k), b = random_vec(rng, k * n), bt = random_vec(rng, n * k),
                 at = random_vec(rng, k * m), c0 = random_vec(rng, m * n);

      auto c1 = c0, c2 = c0;
      s.gemm_nn(a.data(), b.data(), c1.data(), m, k, n);
      v->gemm_nn(a.data(), b.data(), c2.data(), m, k, n);
      check_close(c1, c2);

      c1 = c0, c2 = c0;
      s.gemm_nt(a.data(), bt.data(), c1.data(), m, k, n);
      v->gemm_nt(a.data(), bt.data(), c2.data(), m, k, n);
      check_close(c1, c2);

      c1 = c0, c2 = c0;
      s.gemm_tn(at.data(), b.data(), c1.data(), m, k, n);
      v->gemm_tn(at.data(), b.data(), c2.data(), m, k, n);
      check_close(c1, c2);

      const double d1 = s.dot(a.data(), at.data(), m * k), d2 = v->dot(a.data(), at.data(), m * k);
      CHECK(std::abs(d1 - d2) <= 1e-12 * std::max(1.0, std::abs(d1)));

      auto y1 = b, y2 = b;
      s.axpy(0.3, bt.data(), y1.data(), k * n);
      v->axpy(0.3, bt.data(), y2.data(), k * n);
      check_close(y1, y2);
    }
  }

  TEST_CASE("active table can be forced") {
    kernels::set_active(&kernels::scalar_table());
    CHECK(kernels::active().name == kernels::scalar_table().name);
    kernels::set_active(nullptr);
    CHECK(!kernels::active().name.empty());
  }
}
