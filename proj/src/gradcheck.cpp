#include "qdec/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qdec {

GradCheckReport finite_difference_check(const std::function<double()>& loss,
                                        std::span<const std::span<double>> params,
                                        std::span<const std::span<const double>> analytic,
                                        double step, double tolerance) {
  if (!(step > 0.0))
    throw std::invalid_argument("finite_difference_check: step must be positive");
  if (params.size() != analytic.size())
    throw std::invalid_argument("finite_difference_check: mismatched span lists");

  GradCheckReport report;
  std::size_t flat_index = 0;
  for (std::size_t s = 0; s < params.size(); ++s) {
    if (params[s].size() != analytic[s].size())
      throw std::invalid_argument("finite_difference_check: span size mismatch");
    for (std::size_t i = 0; i < params[s].size(); ++i, ++flat_index) {
      double& p = params[s][i];
      const double saved = p;
      p = saved + step;
      const double up = loss();
      p = saved - step;
      const double down = loss();
      p = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[s][i];
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      if (rel > report.max_relative_error) report.max_relative_error = rel;
      if (rel > tolerance) report.failing_parameter_indices.push_back(flat_index);
    }
  }
  return report;
}

}  // namespace qdec
