#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qdec/rng.hpp"
#include "qdec/tensor.hpp"

namespace qdec {

// Entries i.i.d. uniform in [-halfwidth, +halfwidth]; halfwidth must be > 0.
Vec init_uniform_vec(std::size_t n, double halfwidth, Rng& rng);
Mat init_uniform_mat(std::size_t rows, std::size_t cols, double halfwidth, Rng& rng);

// Max-subtracted softmax. Rejects empty or non-finite input.
Vec softmax(std::span<const double> logits);

// -ln(p[target]); target must index into probabilities.
double cross_entropy(std::span<const double> probabilities, std::size_t target);

// Lowest index on ties; input must be non-empty.
std::size_t argmax_lowest(std::span<const double> values);

double global_norm(std::span<const std::span<const double>> grads);

// Scales all gradients by threshold/norm when the global L2 norm exceeds the
// threshold. Returns the pre-clip norm.
double clip_gradient_norm(std::span<const std::span<double>> grads, double threshold);

// Inverted dropout. In training mode each entry is zeroed with probability
// `rate` and survivors are scaled by 1/(1-rate); in inference mode the input
// passes through untouched. When mask_out is given it receives the applied
// per-entry multiplier so a backward pass can reuse it.
Vec apply_dropout(std::span<const double> x, double rate, Rng& rng, bool training,
                  Vec* mask_out = nullptr);

}  // namespace qdec
