#pragma once

#include <cstdint>
#include <optional>

#include <json.hpp>

#include "tactex/neuro/model.hpp"
#include "tactex/neuro/train.hpp"
#include "tactex/tactile/gel.hpp"

namespace tactex::pipeline {

/// Seeds and sizes of the two-phase training run. Every set is generated
/// from its own stream of `seed`.
struct ProtocolOptions {
  std::uint64_t seed = 0;
  std::size_t pretrain_clips = 1000;
  int finetune_poses = 40;
  std::size_t heldout_clips = 100;
  /// Also train a same-seed model on the fine-tune set alone.
  bool direct_baseline = true;
  neuro::ModelConfig model;
  neuro::TrainConfig train;
  tactile::GelConfig gel;
};

struct ProtocolResult {
  neuro::HardnessModel model;
  std::vector<neuro::EpochRecord> history;
  neuro::Metrics pretrain_only;
  neuro::Metrics finetuned;
  std::optional<neuro::Metrics> direct;
  double seconds = 0.0;
};

ProtocolResult run_training_protocol(const ProtocolOptions& options, const neuro::EpochCallback& on_epoch = {});

nlohmann::json to_json(const neuro::Metrics& m);
nlohmann::json to_json(const ProtocolResult& r);

}  // namespace tactex::pipeline
