#include "qdec/ops.hpp"

#include <cmath>
#include <stdexcept>

#include "qdec/kernels.hpp"

namespace qdec {

Vec init_uniform_vec(std::size_t n, double halfwidth, Rng& rng) {
  if (!(halfwidth > 0.0))
    throw std::invalid_argument("init_uniform: halfwidth must be positive");
  Vec out(n);
  for (double& v : out) v = rng.uniform(-halfwidth, halfwidth);
  return out;
}

Mat init_uniform_mat(std::size_t rows, std::size_t cols, double halfwidth, Rng& rng) {
  if (!(halfwidth > 0.0))
    throw std::invalid_argument("init_uniform: halfwidth must be positive");
  Mat out(rows, cols);
  for (double& v : out.flat()) v = rng.uniform(-halfwidth, halfwidth);
  return out;
}

Vec softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  for (double v : logits)
    if (!std::isfinite(v)) throw std::invalid_argument("softmax: non-finite logit");
  const double m = kern::active().max(logits.data(), logits.size());
  Vec out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    total += out[i];
  }
  const double inv = 1.0 / total;
  kern::active().scale(out.data(), inv, out.size());
  return out;
}

double cross_entropy(std::span<const double> probabilities, std::size_t target) {
  if (target >= probabilities.size())
    throw std::invalid_argument("cross_entropy: target index out of range");
  return -std::log(probabilities[target]);
}

std::size_t argmax_lowest(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

double global_norm(std::span<const std::span<const double>> grads) {
  double sq = 0.0;
  for (const auto& g : grads) sq += kern::active().sum_sq(g.data(), g.size());
  return std::sqrt(sq);
}

double clip_gradient_norm(std::span<const std::span<double>> grads, double threshold) {
  if (!(threshold > 0.0))
    throw std::invalid_argument("clip_gradient_norm: threshold must be positive");
  double sq = 0.0;
  for (const auto& g : grads) sq += kern::active().sum_sq(g.data(), g.size());
  const double norm = std::sqrt(sq);
  if (norm > threshold) {
    const double factor = threshold / norm;
    for (const auto& g : grads) kern::active().scale(g.data(), factor, g.size());
  }
  return norm;
}

Vec apply_dropout(std::span<const double> x, double rate, Rng& rng, bool training,
                  Vec* mask_out) {
  if (rate < 0.0 || rate >= 1.0)
    throw std::invalid_argument("apply_dropout: rate must be in [0, 1)");
  Vec out(x.begin(), x.end());
  if (!training || rate == 0.0) {
    if (mask_out) mask_out->assign(x.size(), 1.0);
    return out;
  }
  const double keep_scale = 1.0 / (1.0 - rate);
  if (mask_out) mask_out->assign(x.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (rng.uniform() < rate) {
      out[i] = 0.0;
    } else {
      out[i] *= keep_scale;
      if (mask_out) (*mask_out)[i] = keep_scale;
    }
  }
  return out;
}

}  // namespace qdec
