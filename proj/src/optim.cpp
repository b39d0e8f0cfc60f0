#include "qdec/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "qdec/kernels.hpp"

namespace qdec {

AdaGrad::AdaGrad(const AdaGradConfig& cfg, std::size_t total_params)
    : cfg_(cfg), acc_(total_params, 0.0) {
  if (!(cfg.learning_rate > 0.0))
    throw std::invalid_argument("AdaGrad: learning_rate must be positive");
  if (cfg.weight_decay < 0.0)
    throw std::invalid_argument("AdaGrad: weight_decay must be non-negative");
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("AdaGrad: epsilon must be positive");
}

void AdaGrad::step(std::span<const std::span<double>> params,
                   std::span<const std::span<const double>> grads) {
  if (params.size() != grads.size())
    throw std::invalid_argument("AdaGrad::step: mismatched span lists");
  std::size_t total = 0;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (params[i].size() != grads[i].size())
      throw std::invalid_argument("AdaGrad::step: span size mismatch");
    for (double g : grads[i])
      if (!std::isfinite(g)) throw std::invalid_argument("AdaGrad::step: non-finite gradient");
    total += grads[i].size();
  }
  if (total != acc_.size())
    throw std::invalid_argument("AdaGrad::step: parameter count changed");

  std::size_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    kern::active().adagrad_update(params[i].data(), acc_.data() + offset, grads[i].data(),
                                  grads[i].size(), cfg_.learning_rate, cfg_.weight_decay,
                                  cfg_.epsilon);
    offset += grads[i].size();
  }
}

}  // namespace qdec
