#include "tactex/pipeline/ranking.hpp"

#include <algorithm>
#include <stdexcept>

#include "tactex/common/rng.hpp"
#include "tactex/neuro/data.hpp"
#include "tactex/scene/scene.hpp"
#include "tactex/tactile/dataset.hpp"

namespace tactex::pipeline {

std::vector<FruitFamily> default_ranking_families() {
  return {
      {"mango", {{"Hard (1)", 80.0}, {"Soft (0)", 68.0}}},
      {"lime", {{"Hard (1)", 70.0}, {"Soft (0)", 64.0}}},
      {"tomato", {{"Hard (1)", 71.0}, {"Soft (0)", 64.0}}},
      {"banana", {{"Hard (2)", 76.0}, {"Medium (1)", 69.5}, {"Soft (0)", 63.0}}},
      {"avocado", {{"Hard (2)", 74.0}, {"Medium (1)", 68.0}, {"Soft (0)", 62.0}}},
  };
}

namespace {

// stable across standard libraries, unlike std::hash
std::uint64_t name_stream(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

}  // namespace

FruitFamily near_tie_lime() { return {"lime", {{"Hard (1)", 64.13}, {"Soft (0)", 63.84}}}; }

bool FamilyResult::all_significant(double alpha) const {
  return !report.comparisons.empty() &&
         std::all_of(report.comparisons.begin(), report.comparisons.end(),
                     [&](const stats::PairwiseComparison& c) { return c.p_adjusted < alpha; });
}

FamilyResult evaluate_family(const FruitFamily& family, const neuro::HardnessModel& model, const RankingOptions& opt) {
  if (family.stages.size() < 2) throw std::invalid_argument("ranking: a family needs at least two stages");
  if (opt.samples_per_stage < 1) throw std::invalid_argument("ranking: samples_per_stage must be >= 1");
  const auto& priors = scene::default_class_priors();
  const auto prior = priors.find(family.fruit);
  if (prior == priors.end()) throw std::invalid_argument("ranking: unknown fruit " + family.fruit);

  FamilyResult out;
  out.family = family;
  std::vector<stats::RankGroup> groups;
  for (std::size_t s = 0; s < family.stages.size(); ++s) {
    const auto& stage = family.stages[s];
    const auto stage_seed = derive_seed(derive_seed(opt.seed, name_stream(family.fruit)), s);
    Rng rng(stage_seed);
    std::vector<double> hardness;
    for (int i = 0; i < opt.samples_per_stage; ++i)
      hardness.push_back(std::clamp(gaussian(rng, stage.hardness, opt.stage_spread), 0.0, 100.0));
    const auto clips =
        tactile::generate_clips_for(family.fruit, hardness, prior->second.radius_mm, derive_seed(stage_seed, 1), opt.gel);
    std::vector<neuro::Sequence> batch;
    for (const auto& c : clips)
      batch.push_back(neuro::to_sequence(neuro::prepare_clip(c, model.config().frames, model.config().input_size)));
    out.predictions.push_back(model.predict(batch));
    groups.push_back({stage.condition, out.predictions.back()});
  }
  out.report = stats::build_rank_report(family.fruit, groups);
  return out;
}

std::vector<FamilyResult> evaluate_ranking(const std::vector<FruitFamily>& families, const neuro::HardnessModel& model,
                                           const RankingOptions& options) {
  std::vector<FamilyResult> out;
  for (const auto& f : families) out.push_back(evaluate_family(f, model, options));
  return out;
}

nlohmann::json to_json(const FamilyResult& r) {
  auto j = stats::to_json(r.report);
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : r.family.stages) stages.push_back({{"condition", s.condition}, {"true_hardness", s.hardness}});
  j["stages"] = stages;
  return j;
}

}  // namespace tactex::pipeline
