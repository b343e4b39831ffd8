#pragma once

#include <vector>

#include "tactex/neuro/model.hpp"

namespace tactex::neuro {

struct AdamWConfig {
  double lr_early = 5e-5;
  double lr_late = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

/// Decoupled weight decay Adam with one learning rate per parameter group.
class AdamW {
 public:
  AdamW(std::vector<Parameter>& params, AdamWConfig config);

  /// Throws NeuroError naming the parameter when a gradient is not finite.
  void step();
  void zero_grad();
  double lr(ParamGroup group) const { return group == ParamGroup::early ? lr_early_ : lr_late_; }
  void scale_lr(double factor);
  long steps() const { return t_; }

 private:
  std::vector<Parameter>* params_;
  AdamWConfig config_;
  double lr_early_, lr_late_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// Reduce-on-plateau for a metric to minimise.
class PlateauScheduler {
 public:
  explicit PlateauScheduler(double factor = 0.2, int patience = 2, double rel_threshold = 1e-4);
  /// Returns the multiplicative factor to apply to learning rates (1 or `factor`).
  double step(double metric);

 private:
  double factor_;
  int patience_;
  double threshold_;
  double best_;
  int bad_epochs_ = 0;
};

}  // namespace tactex::neuro
