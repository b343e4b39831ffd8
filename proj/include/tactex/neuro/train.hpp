#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tactex/neuro/data.hpp"
#include "tactex/neuro/model.hpp"
#include "tactex/neuro/optim.hpp"

namespace tactex::neuro {

struct TrainConfig {
  int pretrain_epochs = 80;
  int finetune_epochs = 15;
  int batch_size = 8;
  double lr_early = 5e-5;
  double lr_late = 1e-3;
  double weight_decay = 1e-4;
  double plateau_factor = 0.2;
  int plateau_patience = 2;
  int frames = 2;
  std::uint64_t seed = 0;
  /// Random horizontal flips.
  bool augment = true;
  /// Brightness/contrast/saturation/hue jitter on top of flips. Off by default: the simulated
  /// sensor has fixed illumination and encodes indentation in difference amplitude.
  bool photometric_jitter = false;
  /// Share of each phase's set held out to drive the scheduler.
  double val_fraction = 0.2;
  /// Abort when the epoch loss exceeds this multiple of the first epoch's for `divergence_epochs` epochs.
  double divergence_factor = 10.0;
  int divergence_epochs = 3;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);

struct EpochRecord {
  int epoch = 0;
  std::string phase;
  double train_loss = 0.0;
  double val_rmse = 0.0;
  /// NaN when the validation labels are constant.
  double val_r2 = 0.0;
  double val_rho = 0.0;
};

struct Metrics {
  double rmse = 0.0;
  double r2 = 0.0;
  double rho = 0.0;
  double prediction_variance = 0.0;
  std::size_t n = 0;
};

class TrainingDiverged : public NeuroError {
 public:
  TrainingDiverged(const std::string& what, std::vector<EpochRecord> history)
      : NeuroError(what), history(std::move(history)) {}
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

std::vector<double> predict_all(const HardnessModel& model, const std::vector<PreparedClip>& clips,
                                std::size_t batch = 32);
/// R2 and rho are NaN when labels are constant.
Metrics compute_metrics(const std::vector<double>& predictions, const std::vector<double>& labels);
Metrics evaluate(const HardnessModel& model, const std::vector<PreparedClip>& clips);

/// One optimisation phase with a fresh optimiser and scheduler. Appends to `history`.
void train_phase(HardnessModel& model, const std::vector<PreparedClip>& train, const std::vector<PreparedClip>& val,
                 int epochs, const TrainConfig& config, const std::string& phase, std::uint64_t seed,
                 std::vector<EpochRecord>& history, const EpochCallback& on_epoch = {});

struct TrainResult {
  std::vector<EpochRecord> history;
  Metrics pretrain_val;
  Metrics finetune_val;
};

/// Pretrain then fine-tune; either set may be empty to skip its phase.
TrainResult train(HardnessModel& model, const std::vector<PreparedClip>& pretrain,
                  const std::vector<PreparedClip>& finetune, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

struct LooFold {
  std::string object;
  Metrics metrics;
  std::vector<double> predictions;
  std::vector<double> labels;
};

struct LooResult {
  std::vector<LooFold> folds;
  /// Metrics over the pooled held-out predictions of all folds.
  Metrics pooled;
};

/// Fine-tunes a copy of `pretrained` once per object with that object held out.
LooResult leave_one_object_out(const HardnessModel& pretrained, const std::vector<PreparedClip>& finetune,
                               const TrainConfig& config, const EpochCallback& on_epoch = {});

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path);

}  // namespace tactex::neuro
