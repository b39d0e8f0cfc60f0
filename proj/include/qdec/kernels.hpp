#pragma once

#include <cstddef>
#include <string>

namespace qdec::kern {

// Data-parallel primitives behind every dense layer. The scalar variants are
// the reference semantics; SIMD variants may reassociate reductions and are
// held to the equivalence tolerances in the kernel tests. Transcendentals
// (exp/tanh) are deliberately not part of this table: they stay scalar in all
// call sites so variants differ only by reduction order.
struct Backend {
  const char* name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*scale)(double* x, double alpha, std::size_t n);
  // y += A x         (A is m x n, row-major; x has n entries, y has m)
  void (*matvec_add)(const double* a, std::size_t m, std::size_t n, const double* x, double* y);
  // y += A^T x       (A is m x n, row-major; x has m entries, y has n)
  void (*matvec_t_add)(const double* a, std::size_t m, std::size_t n, const double* x, double* y);
  // G += x y^T       (G is m x n, row-major)
  void (*outer_add)(double* g, std::size_t m, std::size_t n, const double* x, const double* y);
  double (*sum)(const double* x, std::size_t n);
  double (*sum_sq)(const double* x, std::size_t n);
  double (*max)(const double* x, std::size_t n);  // n >= 1
  // AdaGrad: acc += g*g; p = p*(1 - lr*wd) - lr*g/(sqrt(acc) + eps)
  void (*adagrad_update)(double* p, double* acc, const double* g, std::size_t n,
                         double lr, double wd, double eps);
};

const Backend& scalar_backend();

// nullptr when AVX2 is unavailable at build or run time.
const Backend* avx2_backend();

// Backend used by all higher layers. Chosen once per process: the
// QDECODE_KERNELS env var (scalar|avx2|auto) if set, otherwise the widest
// supported variant.
const Backend& active();

// Override the active backend (tests, CLI flag). Throws std::invalid_argument
// for unknown or unsupported names.
void select(const std::string& name);

}  // namespace qdec::kern
