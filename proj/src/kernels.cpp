#include "qdec/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace qdec::kern {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double* x, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void matvec_add_scalar(const double* a, std::size_t m, std::size_t n, const double* x,
                       double* y) {
  for (std::size_t r = 0; r < m; ++r) y[r] += dot_scalar(a + r * n, x, n);
}

void matvec_t_add_scalar(const double* a, std::size_t m, std::size_t n, const double* x,
                         double* y) {
  for (std::size_t r = 0; r < m; ++r) axpy_scalar(x[r], a + r * n, y, n);
}

void outer_add_scalar(double* g, std::size_t m, std::size_t n, const double* x,
                      const double* y) {
  for (std::size_t r = 0; r < m; ++r) axpy_scalar(x[r], y, g + r * n, n);
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sum_sq_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double max_scalar(const double* x, std::size_t n) {
  double best = x[0];
  for (std::size_t i = 1; i < n; ++i)
    if (x[i] > best) best = x[i];
  return best;
}

void adagrad_update_scalar(double* p, double* acc, const double* g, std::size_t n,
                           double lr, double wd, double eps) {
  const double keep = 1.0 - lr * wd;
  for (std::size_t i = 0; i < n; ++i) {
    acc[i] += g[i] * g[i];
    p[i] = p[i] * keep - lr * g[i] / (std::sqrt(acc[i]) + eps);
  }
}

constexpr Backend kScalar{
    "scalar",      dot_scalar,      axpy_scalar, scale_scalar,
    matvec_add_scalar, matvec_t_add_scalar, outer_add_scalar,
    sum_scalar,    sum_sq_scalar,   max_scalar,  adagrad_update_scalar,
};

const Backend* pick_default() {
  if (const Backend* avx2 = avx2_backend()) return avx2;
  return &kScalar;
}

std::atomic<const Backend*> g_active{nullptr};

const Backend* init_from_env() {
  if (const char* env = std::getenv("QDECODE_KERNELS")) {
    std::string name(env);
    if (name == "scalar") return &kScalar;
    if (name == "avx2") {
      if (const Backend* avx2 = avx2_backend()) return avx2;
      throw std::invalid_argument("QDECODE_KERNELS=avx2 requested but AVX2 is unavailable");
    }
    if (name != "auto" && !name.empty())
      throw std::invalid_argument("unknown QDECODE_KERNELS value: " + name);
  }
  return pick_default();
}

}  // namespace

const Backend& scalar_backend() { return kScalar; }

#if !defined(QDEC_HAVE_AVX2_TU)
const Backend* avx2_backend() { return nullptr; }
#endif

const Backend& active() {
  const Backend* b = g_active.load(std::memory_order_acquire);
  if (!b) {
    b = init_from_env();
    g_active.store(b, std::memory_order_release);
  }
  return *b;
}

void select(const std::string& name) {
  if (name == "scalar") {
    g_active.store(&kScalar, std::memory_order_release);
    return;
  }
  if (name == "avx2") {
    if (const Backend* avx2 = avx2_backend()) {
      g_active.store(avx2, std::memory_order_release);
      return;
    }
    throw std::invalid_argument("AVX2 kernels unavailable on this machine");
  }
  if (name == "auto") {
    g_active.store(pick_default(), std::memory_order_release);
    return;
  }
  throw std::invalid_argument("unknown kernel backend: " + name);
}

}  // namespace qdec::kern
