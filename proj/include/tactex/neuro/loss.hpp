#pragma once

#include <span>

#include "tactex/neuro/tensor.hpp"

namespace tactex::neuro {

inline constexpr double kVarianceWeight = 4.0;
inline constexpr double kVarianceEpsilon = 1e-6;
inline constexpr double kPenaltyCap = 1000.0;

/// MSE(p, l) + 4 * min(1 / (Var(p) + 1e-6), 1000), Var the population variance.
/// p and l have the same length >= 2.
Tensor hardness_loss(const Tensor& p, const Tensor& l);

struct LossTerms {
  double mse = 0.0;
  double variance = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};

LossTerms loss_terms(std::span<const double> p, std::span<const double> l);

}  // namespace tactex::neuro
