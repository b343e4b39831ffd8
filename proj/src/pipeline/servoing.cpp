#include "tactex/pipeline/servoing.hpp"

#include <cmath>
#include <limits>

#include "tactex/common/rng.hpp"
#include "tactex/scene/render.hpp"
#include "tactex/vision/mask_ops.hpp"

namespace tactex::pipeline {

stats::TestResult one_sample_t_or_degenerate(const std::vector<double>& x, double mu0, stats::Alternative alternative) {
  if (x.size() >= 2 && stats::variance(x, 1) > 0.0) return stats::one_sample_t(x, mu0, alternative);
  if (x.empty()) throw stats::StatsError("one-sample t: empty sample");
  const double m = stats::mean(x);
  stats::TestResult r;
  r.n1 = x.size();
  r.df = static_cast<double>(x.size()) - 1.0;
  r.alternative = alternative;
  const double inf = std::numeric_limits<double>::infinity();
  r.statistic = m > mu0 ? inf : (m < mu0 ? -inf : 0.0);
  switch (alternative) {
    case stats::Alternative::greater: r.p_value = m > mu0 ? 0.0 : 1.0; break;
    case stats::Alternative::less: r.p_value = m < mu0 ? 0.0 : 1.0; break;
    case stats::Alternative::two_sided: r.p_value = m != mu0 ? 0.0 : 1.0; break;
  }
  return r;
}

stats::TestResult ProfileServoing::error_vs_tolerance(double tolerance_mm, stats::Alternative alternative) const {
  return one_sample_t_or_degenerate(error_mm, tolerance_mm, alternative);
}

ServoingReport evaluate_servoing(const std::vector<vision::DetectorProfile>& profiles, const ServoingOptions& opt) {
  if (opt.n_scenes < 1) throw std::invalid_argument("servoing: need at least one scene");
  ServoingReport rep;
  rep.options = opt;
  for (const auto& p : profiles) {
    p.validate();
    rep.profiles.push_back({});
    rep.profiles.back().name = p.name;
  }
  const auto& k = opt.intrinsics;
  auto no_refine = opt.localize;
  no_refine.refine = false;
  auto no_median = opt.localize;
  no_median.temporal_median = false;

  for (int s = 0; s < opt.n_scenes; ++s) {
    const auto sc = scene::generate_scene(derive_seed(opt.seed, static_cast<std::uint64_t>(s)), std::nullopt);
    const auto frames = scene::render_sequence(sc, k, opt.depth_noise_sigma, derive_seed(opt.seed, 50000 + s),
                                               vision::kDepthFrames, opt.pose);
    for (const auto& obj : sc.objects) {
      const auto truth_mask = scene::ground_truth_mask(sc, obj.id, k, opt.pose);
      const auto ref = vision::reference_centroid(sc, obj.id, k, opt.pose);
      for (std::size_t pi = 0; pi < profiles.size(); ++pi) {
        auto& out = rep.profiles[pi];
        ++out.attempts;
        const auto dets =
            vision::detect(frames.front(), sc, {obj.label}, profiles[pi], derive_seed(opt.seed, 90000 + s), k, opt.pose);
        // with same-label twins in the scene, score the instance under test
        const vision::Detection* hit = nullptr;
        for (const auto& d : dets)
          if (d.label == obj.label && d.source_object == obj.id) hit = &d;
        if (!hit) continue;
        const auto loc = vision::localize(hit->mask, frames, k, opt.pose, opt.localize);
        const double midline = vision::planar_distance(loc.centroid_world, obj.center);
        if (midline >= obj.radius) continue;
        ++out.successes;
        out.confidence.push_back(hit->confidence);
        out.iou.push_back(vision::iou(hit->mask, truth_mask));
        out.error_mm.push_back(vision::planar_distance(loc.centroid_world, ref));
        out.midline_mm.push_back(midline);
        if (opt.ablations) {
          out.error_no_refine_mm.push_back(
              vision::planar_distance(vision::localize(hit->mask, frames, k, opt.pose, no_refine).centroid_world, ref));
          out.error_no_median_mm.push_back(
              vision::planar_distance(vision::localize(hit->mask, frames, k, opt.pose, no_median).centroid_world, ref));
        }
      }
    }
  }

  if (rep.profiles.size() == 2) {
    const auto& a = rep.profiles[0];
    const auto& b = rep.profiles[1];
    auto welch = [](const std::vector<double>& x, const std::vector<double>& y) -> std::optional<stats::TestResult> {
      if (x.size() < 2 || y.size() < 2 || (stats::variance(x) == 0.0 && stats::variance(y) == 0.0)) return std::nullopt;
      return stats::welch_t(x, y);
    };
    rep.welch_confidence = welch(a.confidence, b.confidence);
    rep.welch_iou = welch(a.iou, b.iou);
    rep.welch_error = welch(a.error_mm, b.error_mm);
  }
  return rep;
}

namespace {

nlohmann::json interval(const std::vector<double>& x) {
  if (x.empty()) return nullptr;
  if (x.size() < 2) return {{"mean", stats::mean(x)}, {"n", x.size()}};
  const auto ci = stats::mean_confidence_interval(x, 0.95);
  return {{"mean", ci.mean}, {"ci95", {ci.lower, ci.upper}}, {"n", x.size()}};
}

nlohmann::json test_json(const stats::TestResult& t) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(v > 0 ? "inf" : "-inf"); };
  return {{"statistic", num(t.statistic)},
          {"p_value", t.p_value},
          {"df", t.df},
          {"alternative", stats::to_string(t.alternative)}};
}

nlohmann::json optional_test(const std::optional<stats::TestResult>& t) { return t ? test_json(*t) : nullptr; }

}  // namespace

nlohmann::json to_json(const ServoingReport& rep) {
  nlohmann::json profiles = nlohmann::json::array();
  for (const auto& p : rep.profiles) {
    nlohmann::json j{{"name", p.name},
                     {"attempts", p.attempts},
                     {"successes", p.successes},
                     {"success_rate", p.success_rate()},
                     {"confidence", interval(p.confidence)},
                     {"iou", interval(p.iou)},
                     {"centroid_error_mm", interval(p.error_mm)},
                     {"midline_error_mm", interval(p.midline_mm)}};
    if (p.error_mm.size() >= 1) {
      j["error_vs_tolerance"] = {
          {"greater", test_json(p.error_vs_tolerance(rep.options.tolerance_mm, stats::Alternative::greater))},
          {"less", test_json(p.error_vs_tolerance(rep.options.tolerance_mm, stats::Alternative::less))}};
    }
    if (!p.error_no_refine_mm.empty()) {
      j["ablation"] = {{"no_refine_error_mm", interval(p.error_no_refine_mm)},
                       {"no_median_error_mm", interval(p.error_no_median_mm)}};
    }
    profiles.push_back(j);
  }
  return {{"n_scenes", rep.options.n_scenes},
          {"depth_noise_sigma", rep.options.depth_noise_sigma},
          {"tolerance_mm", rep.options.tolerance_mm},
          {"seed", rep.options.seed},
          {"profiles", profiles},
          {"welch", {{"confidence", optional_test(rep.welch_confidence)},
                     {"iou", optional_test(rep.welch_iou)},
                     {"centroid_error", optional_test(rep.welch_error)}}}};
}

}  // namespace tactex::pipeline
