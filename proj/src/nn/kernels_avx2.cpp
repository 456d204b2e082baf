#include "kernels_impl.hpp"

#include <immintrin.h>

#include <algorithm>

namespace polynet::nn::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// C row block += sum_p coef(p) * B[p, j0 : j0+16], with coef read at a stride.
// Shared by gemm_nn (coef = A[i, p]) and gemm_tn (coef = A[p, i]).
inline void axpy_rows(std::size_t n, std::size_t k, const double* coef, std::size_t coef_stride, const double* b,
                      double* crow) {
  std::size_t j = 0;
  for (; j + 16 <= n; j += 16) {
    __m256d c0 = _mm256_loadu_pd(crow + j);
    __m256d c1 = _mm256_loadu_pd(crow + j + 4);
    __m256d c2 = _mm256_loadu_pd(crow + j + 8);
    __m256d c3 = _mm256_loadu_pd(crow + j + 12);
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d av = _mm256_broadcast_sd(coef + p * coef_stride);
      const double* brow = b + p * n + j;
      c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow), c0);
      c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 4), c1);
      c2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 8), c2);
      c3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 12), c3);
    }
    _mm256_storeu_pd(crow + j, c0);
    _mm256_storeu_pd(crow + j + 4, c1);
    _mm256_storeu_pd(crow + j + 8, c2);
    _mm256_storeu_pd(crow + j + 12, c3);
  }
  for (; j + 4 <= n; j += 4) {
    __m256d c0 = _mm256_loadu_pd(crow + j);
    for (std::size_t p = 0; p < k; ++p)
      c0 = _mm256_fmadd_pd(_mm256_broadcast_sd(coef + p * coef_stride), _mm256_loadu_pd(b + p * n + j), c0);
    _mm256_storeu_pd(crow + j, c0);
  }
  for (; j < n; ++j) {
    double sum = crow[j];
    for (std::size_t p = 0; p < k; ++p) sum += coef[p * coef_stride] * b[p * n + j];
    crow[j] = sum;
  }
}

void gemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
                  bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) axpy_rows(n, k, a + i * k, 1, b, c + i * n);
}

void gemm_tn_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
                  bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) axpy_rows(n, k, a + i, m, b, c + i * n);
}

void gemm_nt_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
                  bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const double* b0 = b + j * k;
      const double* b1 = b0 + k;
      const double* b2 = b1 + k;
      const double* b3 = b2 + k;
      __m256d s0 = _mm256_setzero_pd();
      __m256d s1 = _mm256_setzero_pd();
      __m256d s2 = _mm256_setzero_pd();
      __m256d s3 = _mm256_setzero_pd();
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) {
        const __m256d av = _mm256_loadu_pd(arow + p);
        s0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b0 + p), s0);
        s1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b1 + p), s1);
        s2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b2 + p), s2);
        s3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b3 + p), s3);
      }
      double t0 = hsum(s0), t1 = hsum(s1), t2 = hsum(s2), t3 = hsum(s3);
      for (; p < k; ++p) {
        t0 += arow[p] * b0[p];
        t1 += arow[p] * b1[p];
        t2 += arow[p] * b2[p];
        t3 += arow[p] * b3[p];
      }
      double* out = c + i * n + j;
      if (accumulate) {
        out[0] += t0;
        out[1] += t1;
        out[2] += t2;
        out[3] += t3;
      } else {
        out[0] = t0;
        out[1] = t1;
        out[2] = t2;
        out[3] = t3;
      }
    }
    for (; j < n; ++j) {
      const double* brow = b + j * k;
      __m256d s = _mm256_setzero_pd();
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) s = _mm256_fmadd_pd(_mm256_loadu_pd(arow + p), _mm256_loadu_pd(brow + p), s);
      double t = hsum(s);
      for (; p < k; ++p) t += arow[p] * brow[p];
      c[i * n + j] = accumulate ? c[i * n + j] + t : t;
    }
  }
}

}  // namespace

const KernelTable& avx2_table_unchecked() {
  static const KernelTable table{"avx2", gemm_nn_avx2, gemm_nt_avx2, gemm_tn_avx2};
  return table;
}

}  // namespace polynet::nn::kernels::detail
