#include "sqi/kernels.hpp"

#if defined(SQI_HAVE_AVX2)
#include <immintrin.h>
#endif

namespace sqi::kernels::avx2 {

#if defined(SQI_HAVE_AVX2)

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// y[0..n) += alpha * x[0..n)
inline void axpy_inner(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t j = 0;
  for (; j + 16 <= n; j += 16) {
    __m256d y0 = _mm256_loadu_pd(y + j);
    __m256d y1 = _mm256_loadu_pd(y + j + 4);
    __m256d y2 = _mm256_loadu_pd(y + j + 8);
    __m256d y3 = _mm256_loadu_pd(y + j + 12);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j), y0);
    y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j + 4), y1);
    y2 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j + 8), y2);
    y3 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j + 12), y3);
    _mm256_storeu_pd(y + j, y0);
    _mm256_storeu_pd(y + j + 4, y1);
    _mm256_storeu_pd(y + j + 8, y2);
    _mm256_storeu_pd(y + j + 12, y3);
  }
  for (; j + 4 <= n; j += 4) {
    _mm256_storeu_pd(y + j, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
  }
  for (; j < n; ++j) y[j] += alpha * x[j];
}

}  // namespace

bool compiled() { return true; }

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) { axpy_inner(alpha, x, y, n); }

double sum_squares(const double* x, std::size_t n) { return dot(x, x, n); }

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  // Four rows of C per pass share each row of B while it is hot.
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    double* c0 = c + i * n;
    double* c1 = c0 + n;
    double* c2 = c1 + n;
    double* c3 = c2 + n;
    const double* a0 = a + i * k;
    const double* a1 = a0 + k;
    const double* a2 = a1 + k;
    const double* a3 = a2 + k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * n;
      const __m256d v0 = _mm256_set1_pd(a0[p]);
      const __m256d v1 = _mm256_set1_pd(a1[p]);
      const __m256d v2 = _mm256_set1_pd(a2[p]);
      const __m256d v3 = _mm256_set1_pd(a3[p]);
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        const __m256d bv = _mm256_loadu_pd(brow + j);
        _mm256_storeu_pd(c0 + j, _mm256_fmadd_pd(v0, bv, _mm256_loadu_pd(c0 + j)));
        _mm256_storeu_pd(c1 + j, _mm256_fmadd_pd(v1, bv, _mm256_loadu_pd(c1 + j)));
        _mm256_storeu_pd(c2 + j, _mm256_fmadd_pd(v2, bv, _mm256_loadu_pd(c2 + j)));
        _mm256_storeu_pd(c3 + j, _mm256_fmadd_pd(v3, bv, _mm256_loadu_pd(c3 + j)));
      }
      for (; j < n; ++j) {
        c0[j] += a0[p] * brow[j];
        c1[j] += a1[p] * brow[j];
        c2[j] += a2[p] * brow[j];
        c3[j] += a3[p] * brow[j];
      }
    }
  }
  for (; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) axpy_inner(a[i * k + p], b + p * n, crow, n);
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      axpy_inner(aip, brow, c + p * n, n);
    }
  }
}

#else

bool compiled() { return false; }
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
double sum_squares(const double* x, std::size_t n) { return scalar::sum_squares(x, n); }
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  scalar::gemm_nn(m, n, k, a, b, c);
}
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  scalar::gemm_tn(m, n, k, a, b, c);
}

#endif

}  // namespace sqi::kernels::avx2
