#include "tactex/pipeline/protocol.hpp"

#include <chrono>
#include <cmath>

#include "tactex/neuro/data.hpp"
#include "tactex/tactile/dataset.hpp"

namespace tactex::pipeline {

ProtocolResult run_training_protocol(const ProtocolOptions& o, const neuro::EpochCallback& on_epoch) {
  const auto t0 = std::chrono::steady_clock::now();
  o.model.validate();
  o.train.validate();
  const int frames = o.model.frames, size = o.model.input_size;
  const auto pre = neuro::prepare_clips(tactile::generate_pretrain_set(o.pretrain_clips, 1001 + o.seed, o.gel), frames, size);
  const auto ft = neuro::prepare_clips(tactile::generate_finetune_set(2002 + o.seed, o.finetune_poses, o.gel), frames, size);
  const auto held = neuro::prepare_clips(tactile::generate_fruit_set(o.heldout_clips, 3003 + o.seed, 60.0, 90.0, o.gel),
                                         frames, size);

  auto cfg = o.train;
  cfg.seed = 7 + o.seed;
  neuro::HardnessModel model(o.model, 7 + o.seed);
  auto pretrain_cfg = cfg;
  pretrain_cfg.finetune_epochs = 0;
  const auto a = neuro::train(model, pre, {}, pretrain_cfg, on_epoch);
  ProtocolResult r{model, a.history, neuro::evaluate(model, held), {}, std::nullopt, 0.0};

  auto finetune_cfg = cfg;
  finetune_cfg.pretrain_epochs = 0;
  const auto b = neuro::train(r.model, {}, ft, finetune_cfg, on_epoch);
  r.history.insert(r.history.end(), b.history.begin(), b.history.end());
  r.finetuned = neuro::evaluate(r.model, held);

  if (o.direct_baseline) {
    neuro::HardnessModel direct(o.model, 7 + o.seed);
    neuro::train(direct, {}, ft, finetune_cfg);
    r.direct = neuro::evaluate(direct, held);
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

nlohmann::json to_json(const neuro::Metrics& m) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"rmse", num(m.rmse)}, {"r2", num(m.r2)}, {"rho", num(m.rho)},
          {"prediction_variance", num(m.prediction_variance)}, {"n", m.n}};
}

nlohmann::json to_json(const ProtocolResult& r) {
  nlohmann::json j{{"pretrain_only", to_json(r.pretrain_only)}, {"finetuned", to_json(r.finetuned)},
                   {"direct", r.direct ? to_json(*r.direct) : nlohmann::json(nullptr)}, {"epochs", r.history.size()}};
  return j;
}

}  // namespace tactex::pipeline
