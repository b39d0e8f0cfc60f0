#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qdec {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::vector<std::size_t> failing_parameter_indices;  // flat indices over all spans
};

// Compares an analytic gradient against central finite differences, one
// parameter at a time. `loss` must re-evaluate the objective from the current
// contents of `params` (which are perturbed in place and restored).
// Relative error per entry: |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport finite_difference_check(const std::function<double()>& loss,
                                        std::span<const std::span<double>> params,
                                        std::span<const std::span<const double>> analytic,
                                        double step, double tolerance);

}  // namespace qdec
