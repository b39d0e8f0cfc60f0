// AVX2/FMA variants of the dense kernels. Built only when the compiler
// accepts -mavx2 -mfma; selected at runtime after a cpuid check.

#include "qdec/kernels.hpp"

#if defined(QDEC_HAVE_AVX2_TU)

#include <immintrin.h>

#include <cmath>

namespace qdec::kern {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double out = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) out += a[i] * b[i];
  return out;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(double* x, double alpha, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
  for (; i < n; ++i) x[i] *= alpha;
}

void matvec_add_avx2(const double* a, std::size_t m, std::size_t n, const double* x,
                     double* y) {
  for (std::size_t r = 0; r < m; ++r) y[r] += dot_avx2(a + r * n, x, n);
}

void matvec_t_add_avx2(const double* a, std::size_t m, std::size_t n, const double* x,
                       double* y) {
  for (std::size_t r = 0; r < m; ++r) axpy_avx2(x[r], a + r * n, y, n);
}

void outer_add_avx2(double* g, std::size_t m, std::size_t n, const double* x,
                    const double* y) {
  for (std::size_t r = 0; r < m; ++r) axpy_avx2(x[r], y, g + r * n, n);
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double out = hsum(acc);
  for (; i < n; ++i) out += x[i];
  return out;
}

double sum_sq_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double out = hsum(acc);
  for (; i < n; ++i) out += x[i] * x[i];
  return out;
}

double max_avx2(const double* x, std::size_t n) {
  std::size_t i = 0;
  double out = x[0];
  if (n >= 4) {
    __m256d best = _mm256_loadu_pd(x);
    for (i = 4; i + 4 <= n; i += 4) best = _mm256_max_pd(best, _mm256_loadu_pd(x + i));
    __m128d lo = _mm256_castpd256_pd128(best);
    __m128d hi = _mm256_extractf128_pd(best, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    out = _mm_cvtsd_f64(_mm_max_sd(lo, shuf));
  }
  for (; i < n; ++i)
    if (x[i] > out) out = x[i];
  return out;
}

void adagrad_update_avx2(double* p, double* acc, const double* g, std::size_t n,
                         double lr, double wd, double eps) {
  const __m256d vkeep = _mm256_set1_pd(1.0 - lr * wd);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vg = _mm256_loadu_pd(g + i);
    __m256d va = _mm256_fmadd_pd(vg, vg, _mm256_loadu_pd(acc + i));
    _mm256_storeu_pd(acc + i, va);
    __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(va), veps);
    __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, vg), denom);
    __m256d vp = _mm256_mul_pd(_mm256_loadu_pd(p + i), vkeep);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(vp, step));
  }
  const double keep = 1.0 - lr * wd;
  for (; i < n; ++i) {
    acc[i] += g[i] * g[i];
    p[i] = p[i] * keep - lr * g[i] / (std::sqrt(acc[i]) + eps);
  }
}

constexpr Backend kAvx2{
    "avx2",          dot_avx2,      axpy_avx2, scale_avx2,
    matvec_add_avx2, matvec_t_add_avx2, outer_add_avx2,
    sum_avx2,        sum_sq_avx2,   max_avx2,  adagrad_update_avx2,
};

bool cpu_supports_avx2() {
#if defined(__GNUC__) || defined(__clang__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

}  // namespace

const Backend* avx2_backend() {
  static const Backend* backend = cpu_supports_avx2() ? &kAvx2 : nullptr;
  return backend;
}

}  // namespace qdec::kern

#endif  // QDEC_HAVE_AVX2_TU
