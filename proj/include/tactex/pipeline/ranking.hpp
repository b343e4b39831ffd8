#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tactex/neuro/model.hpp"
#include "tactex/stats/rank_report.hpp"
#include "tactex/tactile/gel.hpp"

namespace tactex::pipeline {

struct RipenessStage {
  std::string condition;
  double hardness = 0.0;
};

struct FruitFamily {
  std::string fruit;
  /// Hardest first.
  std::vector<RipenessStage> stages;
};

/// Three pairs and two trios with stage gaps of at least 4 HA.
std::vector<FruitFamily> default_ranking_families();
/// The lime pair at its near-tie stage values (gap below 1 HA).
FruitFamily near_tie_lime();

struct RankingOptions {
  int samples_per_stage = 20;
  /// Within-stage spread of true hardness (Gaussian SD, HA).
  double stage_spread = 0.3;
  double alpha = 0.01;
  tactile::GelConfig gel;
  std::uint64_t seed = 0;
};

struct FamilyResult {
  FruitFamily family;
  std::vector<std::vector<double>> predictions;
  stats::RankReport report;

  /// Every Holm-adjusted p below alpha.
  bool all_significant(double alpha) const;
};

/// Presses each stage `samples_per_stage` times, predicts hardness and
/// tests every ordered stage pair.
FamilyResult evaluate_family(const FruitFamily& family, const neuro::HardnessModel& model, const RankingOptions& options);

std::vector<FamilyResult> evaluate_ranking(const std::vector<FruitFamily>& families, const neuro::HardnessModel& model,
                                           const RankingOptions& options);

nlohmann::json to_json(const FamilyResult& result);

}  // namespace tactex::pipeline
