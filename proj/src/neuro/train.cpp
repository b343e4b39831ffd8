#include "tactex/neuro/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "tactex/neuro/loss.hpp"
#include "tactex/stats/descriptive.hpp"

namespace tactex::neuro {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::pair<std::vector<PreparedClip>, std::vector<PreparedClip>> split(const std::vector<PreparedClip>& set,
                                                                        double val_fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(set.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::lround(val_fraction * static_cast<double>(set.size())));
  std::vector<PreparedClip> train, val;
  for (std::size_t k = 0; k < idx.size(); ++k) (k < n_val ? val : train).push_back(set[idx[k]]);
  return {std::move(train), std::move(val)};
}

}  // namespace

void TrainConfig::validate() const {
  if (pretrain_epochs < 0 || finetune_epochs < 0) throw NeuroError("train config: epochs must be non-negative");
  if (batch_size < 2) throw NeuroError("train config: batch size must be at least 2 for the variance term");
  if (!(lr_early > 0.0 && lr_late > lr_early)) throw NeuroError("train config: need 0 < lr_early < lr_late");
  if (weight_decay < 0.0 || frames != 2 && frames != 4) throw NeuroError("train config: bad weight decay or T");
  if (val_fraction < 0.0 || val_fraction >= 1.0) throw NeuroError("train config: val_fraction in [0, 1)");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"pretrain_epochs", c.pretrain_epochs}, {"finetune_epochs", c.finetune_epochs},
          {"batch_size", c.batch_size},           {"lr_early", c.lr_early},
          {"lr_late", c.lr_late},                 {"weight_decay", c.weight_decay},
          {"plateau_factor", c.plateau_factor},   {"plateau_patience", c.plateau_patience},
          {"frames", c.frames},                   {"seed", c.seed},
          {"augment", c.augment},                 {"photometric_jitter", c.photometric_jitter},
          {"val_fraction", c.val_fraction}};
}

std::vector<double> predict_all(const HardnessModel& model, const std::vector<PreparedClip>& clips, std::size_t batch) {
  std::vector<double> out;
  out.reserve(clips.size());
  for (std::size_t i = 0; i < clips.size(); i += batch) {
    std::vector<Sequence> seqs;
    for (std::size_t j = i; j < std::min(clips.size(), i + batch); ++j) seqs.push_back(to_sequence(clips[j]));
    const auto p = model.predict(seqs);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

Metrics compute_metrics(const std::vector<double>& predictions, const std::vector<double>& labels) {
  Metrics m;
  m.n = predictions.size();
  if (m.n == 0) return m;
  m.rmse = stats::rmse(predictions, labels);
  m.prediction_variance = m.n > 1 ? stats::variance(predictions, 0) : 0.0;
  const bool constant_labels = std::all_of(labels.begin(), labels.end(), [&](double v) { return v == labels[0]; });
  const bool constant_preds = m.prediction_variance == 0.0;
  m.r2 = constant_labels || m.n < 2 ? kNaN : stats::r2(predictions, labels);
  m.rho = constant_labels || constant_preds || m.n < 2 ? kNaN : stats::spearman(predictions, labels);
  return m;
}

Metrics evaluate(const HardnessModel& model, const std::vector<PreparedClip>& clips) {
  std::vector<double> labels;
  for (const auto& c : clips) labels.push_back(c.label);
  return compute_metrics(predict_all(model, clips), labels);
}

void train_phase(HardnessModel& model, const std::vector<PreparedClip>& train, const std::vector<PreparedClip>& val,
                 int epochs, const TrainConfig& config, const std::string& phase, std::uint64_t seed,
                 std::vector<EpochRecord>& history, const EpochCallback& on_epoch) {
  if (epochs == 0 || train.size() < 2) return;
  AdamW opt(model.parameters(), {config.lr_early, config.lr_late, 0.9, 0.999, 1e-8, config.weight_decay});
  PlateauScheduler scheduler(config.plateau_factor, config.plateau_patience);
  Rng rng(seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const auto bs = static_cast<std::size_t>(config.batch_size);
  double first_loss = kNaN;
  int diverged_epochs = 0;

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      std::size_t end = std::min(order.size(), start + bs);
      // fold a trailing singleton into nothing: the variance term needs two samples
      if (end - start < 2) break;
      std::vector<Sequence> seqs;
      std::vector<double> labels;
      for (std::size_t k = start; k < end; ++k) {
        const auto& clip = train[order[k]];
        std::optional<AugmentParams> aug;
        if (config.augment) {
          aug = sample_augment(rng());
          if (!config.photometric_jitter) *aug = AugmentParams{aug->flip};
        }
        seqs.push_back(to_sequence(clip, aug));
        labels.push_back(clip.label);
      }
      opt.zero_grad();
      const Tensor pred = model.forward(seqs, true, rng);
      const Tensor loss = hardness_loss(pred, Tensor::from({static_cast<int>(labels.size())}, labels));
      if (!std::isfinite(loss.item())) throw TrainingDiverged(phase + ": non-finite loss", history);
      loss.backward();
      opt.step();
      loss_sum += loss.item();
      ++batches;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.phase = phase;
    rec.train_loss = batches ? loss_sum / static_cast<double>(batches) : kNaN;
    const Metrics vm = val.empty() ? Metrics{} : evaluate(model, val);
    rec.val_rmse = val.empty() ? kNaN : vm.rmse;
    rec.val_r2 = val.empty() ? kNaN : vm.r2;
    rec.val_rho = val.empty() ? kNaN : vm.rho;
    history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (std::isnan(first_loss)) first_loss = rec.train_loss;
    diverged_epochs = rec.train_loss > config.divergence_factor * first_loss ? diverged_epochs + 1 : 0;
    if (diverged_epochs >= config.divergence_epochs) {
      throw TrainingDiverged(phase + ": loss above " + std::to_string(config.divergence_factor) +
                                 "x its initial value for " + std::to_string(diverged_epochs) + " epochs",
                             history);
    }
    opt.scale_lr(scheduler.step(val.empty() ? rec.train_loss : rec.val_rmse));
  }
}

TrainResult train(HardnessModel& model, const std::vector<PreparedClip>& pretrain,
                  const std::vector<PreparedClip>& finetune, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (model.config().frames != config.frames) throw NeuroError("train: model and config disagree on T");
  TrainResult result;
  if (!pretrain.empty() && config.pretrain_epochs > 0) {
    const auto [tr, va] = split(pretrain, config.val_fraction, derive_seed(config.seed, 1));
    train_phase(model, tr, va, config.pretrain_epochs, config, "pretrain", derive_seed(config.seed, 2),
                result.history, on_epoch);
    if (!va.empty()) result.pretrain_val = evaluate(model, va);
  }
  if (!finetune.empty() && config.finetune_epochs > 0) {
    const auto [tr, va] = split(finetune, config.val_fraction, derive_seed(config.seed, 3));
    train_phase(model, tr, va, config.finetune_epochs, config, "finetune", derive_seed(config.seed, 4),
                result.history, on_epoch);
    if (!va.empty()) result.finetune_val = evaluate(model, va);
  }
  return result;
}

LooResult leave_one_object_out(const HardnessModel& pretrained, const std::vector<PreparedClip>& finetune,
                               const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  std::vector<std::string> objects;
  for (const auto& c : finetune)
    if (std::find(objects.begin(), objects.end(), c.object) == objects.end()) objects.push_back(c.object);
  LooResult result;
  std::vector<double> all_p, all_l;
  for (std::size_t k = 0; k < objects.size(); ++k) {
    std::vector<PreparedClip> tr, held;
    for (const auto& c : finetune) (c.object == objects[k] ? held : tr).push_back(c);
    HardnessModel model = pretrained;
    std::vector<EpochRecord> history;
    train_phase(model, tr, held, config.finetune_epochs, config, "finetune-loo:" + objects[k],
                derive_seed(config.seed, 100 + k), history, on_epoch);
    LooFold fold;
    fold.object = objects[k];
    fold.predictions = predict_all(model, held);
    for (const auto& c : held) fold.labels.push_back(c.label);
    fold.metrics = compute_metrics(fold.predictions, fold.labels);
    all_p.insert(all_p.end(), fold.predictions.begin(), fold.predictions.end());
    all_l.insert(all_l.end(), fold.labels.begin(), fold.labels.end());
    result.folds.push_back(std::move(fold));
  }
  result.pooled = compute_metrics(all_p, all_l);
  return result;
}

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw NeuroError("cannot write " + path.string());
  out.precision(10);
  out << "epoch,phase,train_loss,val_rmse,val_r2,val_rho\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << r.phase << ',' << r.train_loss << ',' << r.val_rmse << ',' << r.val_r2 << ','
        << r.val_rho << '\n';
  }
}

}  // namespace tactex::neuro
