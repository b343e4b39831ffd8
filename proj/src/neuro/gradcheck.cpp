#include "tactex/neuro/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "tactex/neuro/loss.hpp"

namespace tactex::neuro {

GradCheckResult gradient_check(HardnessModel& model, const std::vector<Sequence>& batch,
                               const std::vector<double>& labels, double h, double floor) {
  Rng unused(0);
  const Tensor l = Tensor::from({static_cast<int>(labels.size())}, labels);
  for (auto& p : model.parameters()) p.value.zero_grad();
  const Tensor pred = model.forward(batch, false, unused);
  hardness_loss(pred, l).backward();

  GradCheckResult result;
  result.prediction_variance = loss_terms(pred.values(), labels).variance;
  auto loss_at = [&] {
    NoGradGuard guard;
    return loss_terms(model.forward(batch, false, unused).values(), labels).total;
  };
  for (auto& p : model.parameters()) {
    const std::vector<double> analytic = p.value.grad();
    auto& w = p.value.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double saved = w[i];
      w[i] = saved + h;
      const double up = loss_at();
      w[i] = saved - h;
      const double down = loss_at();
      w[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic.empty() ? 0.0 : analytic[i];
      if (std::max(std::fabs(a), std::fabs(numeric)) < floor) {
        ++result.below_floor;
        result.max_abs_error_below_floor = std::max(result.max_abs_error_below_floor, std::fabs(a - numeric));
      }
      const double rel = std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric), floor});
      if (rel > result.max_relative_error || result.checked == 0) {
        result.max_relative_error = rel;
        result.worst_parameter = p.name;
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
      ++result.checked;
    }
  }
  return result;
}

}  // namespace tactex::neuro
