#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qdec/tensor.hpp"

namespace qdec {

struct AdaGradConfig {
  double learning_rate = 0.05;
  double weight_decay = 0.00016;  // decoupled, applied inside the step
  double epsilon = 1e-8;
};

// Adaptive SGD with per-parameter accumulated squared gradients and no
// momentum. Weight decay is applied as a decoupled multiplicative shrink.
class AdaGrad {
 public:
  AdaGrad(const AdaGradConfig& cfg, std::size_t total_params);

  // Spans must match the construction-time total size and keep a stable
  // order across calls; gradients must be finite.
  void step(std::span<const std::span<double>> params,
            std::span<const std::span<const double>> grads);

  std::span<const double> accumulator() const { return acc_; }
  const AdaGradConfig& config() const { return cfg_; }

 private:
  AdaGradConfig cfg_;
  Vec acc_;
};

}  // namespace qdec
