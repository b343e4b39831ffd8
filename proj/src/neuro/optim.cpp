#include "tactex/neuro/optim.hpp"

#include <cmath>
#include <limits>

namespace tactex::neuro {

AdamW::AdamW(std::vector<Parameter>& params, AdamWConfig config)
    : params_(&params), config_(config), lr_early_(config.lr_early), lr_late_(config.lr_late) {
  if (!(config.lr_early > 0.0 && config.lr_late > 0.0)) throw NeuroError("adamw: learning rates must be positive");
  for (const auto& p : params) {
    m_.emplace_back(p.value.size(), 0.0);
    v_.emplace_back(p.value.size(), 0.0);
  }
}

void AdamW::step() {
  auto& params = *params_;
  for (const auto& p : params) {
    for (double g : p.value.grad()) {
      if (!std::isfinite(g)) throw NeuroError("adamw: non-finite gradient in " + p.name);
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    const auto& g = p.value.grad();
    if (g.empty()) continue;
    const double lr = this->lr(p.group);
    auto& w = p.value.values();
    auto& m = m_[k];
    auto& v = v_[k];
    const double decay = p.decay ? 1.0 - lr * config_.weight_decay : 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      w[i] = w[i] * decay - lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + config_.eps);
    }
  }
}

void AdamW::zero_grad() {
  for (auto& p : *params_) p.value.zero_grad();
}

void AdamW::scale_lr(double factor) {
  lr_early_ *= factor;
  lr_late_ *= factor;
}

PlateauScheduler::PlateauScheduler(double factor, int patience, double rel_threshold)
    : factor_(factor), patience_(patience), threshold_(rel_threshold), best_(std::numeric_limits<double>::infinity()) {
  if (!(factor > 0.0 && factor < 1.0) || patience < 0) throw NeuroError("scheduler: bad factor or patience");
}

double PlateauScheduler::step(double metric) {
  if (metric < best_ * (1.0 - threshold_)) {
    best_ = metric;
    bad_epochs_ = 0;
    return 1.0;
  }
  if (++bad_epochs_ > patience_) {
    bad_epochs_ = 0;
    return factor_;
  }
  return 1.0;
}

}  // namespace tactex::neuro
