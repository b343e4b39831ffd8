#pragma once

#include <string>
#include <vector>

#include "tactex/neuro/model.hpp"

namespace tactex::neuro {

inline constexpr double kGradCheckFloor = 1e-6;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  /// Population variance of the predictions at the evaluation point.
  double prediction_variance = 0.0;
  /// Entries whose gradients are all below the floor, and their largest absolute error.
  std::size_t below_floor = 0;
  double max_abs_error_below_floor = 0.0;
};

/// Compares backprop gradients of the hardness loss with central differences over
/// every parameter entry, with dropout disabled. Relative error is
/// |a - n| / max(|a|, |n|, floor); the floor sits above the resolution of the
/// central difference so entries smaller than it are compared absolutely.
GradCheckResult gradient_check(HardnessModel& model, const std::vector<Sequence>& batch,
                               const std::vector<double>& labels, double h = 1e-5, double floor = kGradCheckFloor);

}  // namespace tactex::neuro
