#include "tactex/neuro/loss.hpp"

#include <algorithm>

namespace tactex::neuro {
namespace {

void check_sizes(std::size_t np, std::size_t nl) {
  if (np != nl) throw NeuroError("loss: predictions and labels differ in length");
  if (np < 2) throw NeuroError("loss: batch needs at least 2 predictions for the variance term");
}

}  // namespace

Tensor hardness_loss(const Tensor& p, const Tensor& l) {
  check_sizes(p.size(), l.size());
  const Tensor labels = p.shape() == l.shape() ? l : reshape(l, p.shape());
  const Tensor mse = mean(square(sub(p, labels)));
  const Tensor var = mean(square(sub_broadcast(p, mean(p))));
  const Tensor penalty = mul_scalar(minimum(reciprocal(add_scalar(var, kVarianceEpsilon)), kPenaltyCap),
                                    kVarianceWeight);
  return add(mse, penalty);
}

LossTerms loss_terms(std::span<const double> p, std::span<const double> l) {
  check_sizes(p.size(), l.size());
  const double n = static_cast<double>(p.size());
  LossTerms t;
  double mp = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    t.mse += (p[i] - l[i]) * (p[i] - l[i]) / n;
    mp += p[i] / n;
  }
  for (double v : p) t.variance += (v - mp) * (v - mp) / n;
  t.penalty = kVarianceWeight * std::min(1.0 / (t.variance + kVarianceEpsilon), kPenaltyCap);
  t.total = t.mse + t.penalty;
  return t;
}

}  // namespace tactex::neuro
