#include "tactex/pipeline/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "tactex/common/rng.hpp"
#include "tactex/lang/location.hpp"
#include "tactex/neuro/data.hpp"
#include "tactex/scene/render.hpp"
#include "tactex/tactile/contact.hpp"
#include "tactex/tactile/dataset.hpp"

namespace tactex::pipeline {
namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs stages back to back: each stage starts where the previous ended, so
// the stage durations tile the run.
class StageClock {
 public:
  StageClock(RunRecord& record, const EventSink& sink) : record_(record), sink_(sink), start_(Clock::now()) {}

  template <typename F>
  void run(Stage stage, F&& body) {
    const auto t0 = Clock::now();
    emit(stage, "started", t0, nlohmann::json::object());
    nlohmann::json payload = nlohmann::json::object();
    try {
      payload = body();
    } catch (const std::exception& e) {
      record_.errors.push_back(to_string(stage) + ": " + e.what());
      payload = {{"error", e.what()}};
    }
    const auto t1 = Clock::now();
    record_.timings.push_back({stage, ms_between(t0, t1)});
    emit(stage, "finished", t1, payload);
  }

  void finish() { record_.total_ms = ms_between(start_, Clock::now()); }

 private:
  void emit(Stage stage, const char* status, Clock::time_point t, const nlohmann::json& payload) {
    if (!sink_) return;
    nlohmann::json ev{{"type", "stage"},
                      {"stage", to_string(stage)},
                      {"status", status},
                      {"t_ms", ms_between(start_, t)},
                      {"digest", payload_digest(payload)}};
    if (std::string(status) == "finished") {
      ev["duration_ms"] = record_.timings.back().duration_ms;
      ev["payload"] = payload;
    }
    try {
      sink_(ev);
    } catch (...) {
      // a broken listener must not break the run
    }
  }

  RunRecord& record_;
  const EventSink& sink_;
  Clock::time_point start_;
};

struct Candidate {
  vision::Detection detection;
  std::optional<Eigen::Vector3d> centroid;
  double error_mm = kNaN;
  bool localized = false;
  std::optional<tactile::TactileClip> clip;
  std::optional<double> hardness;
};

}  // namespace

std::string to_string(Stage s) {
  switch (s) {
    case Stage::parse: return "parse";
    case Stage::detect: return "detect";
    case Stage::centroid: return "centroid";
    case Stage::tactile_collection: return "tactile-collection";
    case Stage::inference: return "inference";
    case Stage::explanation: return "explanation";
  }
  return "?";
}

double RunRecord::object_success_rate() const {
  if (objects.empty()) return 0.0;
  const auto ok = std::count_if(objects.begin(), objects.end(), [](const ObjectOutcome& o) { return o.succeeded(); });
  return static_cast<double>(ok) / static_cast<double>(objects.size());
}

bool RunRecord::scenario_success() const {
  return !objects.empty() && judge.communicated() &&
         std::all_of(objects.begin(), objects.end(), [](const ObjectOutcome& o) { return o.succeeded(); });
}

double RunRecord::stage_sum_ms() const {
  double s = 0.0;
  for (const auto& t : timings) s += t.duration_ms;
  return s;
}

std::string payload_digest(const nlohmann::json& payload) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : payload.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunRecord run_query(const scene::Scene& scene, const std::string& text, const neuro::HardnessModel& model,
                    const PipelineConfig& cfg, std::uint64_t seed, const EventSink& sink) {
  RunRecord rec;
  rec.seed = seed;
  rec.query = text;
  StageClock clock(rec, sink);
  const auto lexicon = cfg.lang.lexicon();
  const auto& k = cfg.intrinsics;

  // ground-truth targets, filled once the intent is known
  std::vector<int> target_ids;
  std::vector<Candidate> candidates;
  std::vector<scene::RgbdFrame> frames;

  clock.run(Stage::parse, [&] {
    const auto parsed = lang::parse_query(text, lexicon);
    if (parsed.ok()) {
      rec.intent = parsed.intent;
    } else {
      rec.errors.push_back("parse: " + parsed.error);
    }
    for (const auto& o : scene.objects) {
      const bool wanted = !rec.intent || rec.intent->all_fruits() ||
                          std::find(rec.intent->targets.begin(), rec.intent->targets.end(), o.label) !=
                              rec.intent->targets.end();
      if (wanted) target_ids.push_back(o.id);
    }
    return rec.intent ? lang::to_json(*rec.intent) : nlohmann::json{{"error", parsed.error}};
  });

  if (rec.intent) {
    const auto& intent = *rec.intent;
    clock.run(Stage::detect, [&] {
      frames = scene::render_sequence(scene, k, cfg.depth_noise_sigma, derive_seed(seed, 1), vision::kDepthFrames,
                                      cfg.pose);
      const auto prompt = intent.all_fruits() ? cfg.lang.open_vocabulary : intent.targets;
      auto dets = vision::detect(frames.front(), scene, prompt, cfg.detector, derive_seed(seed, 2), k, cfg.pose);
      std::vector<vision::Detection> kept;
      for (auto& d : dets) {
        const bool relevant = intent.all_fruits() ? lexicon.lookup(d.label).has_value()
                                                  : std::find(intent.targets.begin(), intent.targets.end(),
                                                              d.label) != intent.targets.end();
        if (relevant) kept.push_back(std::move(d));
      }
      if (intent.mode == lang::Mode::identify) kept = vision::best_per_label(kept);
      nlohmann::json summary = nlohmann::json::array();
      for (auto& d : kept) {
        summary.push_back({{"label", d.label}, {"confidence", d.confidence}});
        candidates.push_back({std::move(d), std::nullopt, kNaN, false, std::nullopt, std::nullopt});
      }
      return nlohmann::json{{"detections", summary}};
    });

    clock.run(Stage::centroid, [&] {
      nlohmann::json out = nlohmann::json::array();
      for (auto& c : candidates) {
        auto loc = vision::localize(c.detection.mask, frames, k, cfg.pose, cfg.localize);
        loc.centroid_world += Eigen::Vector3d(cfg.centroid_offset_x_mm, cfg.centroid_offset_y_mm, 0.0);
        c.centroid = loc.centroid_world;
        const auto ref = vision::reference_centroid(scene, c.detection.source_object, k, cfg.pose);
        c.error_mm = vision::planar_distance(loc.centroid_world, ref);
        c.localized = c.error_mm <= cfg.localize_tolerance_mm;
        out.push_back({{"label", c.detection.label},
                       {"centroid_mm", {loc.centroid_world.x(), loc.centroid_world.y(), loc.centroid_world.z()}}});
      }
      return nlohmann::json{{"centroids", out}};
    });

    clock.run(Stage::tactile_collection, [&] {
      int pressed = 0;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        auto& c = candidates[i];
        if (!c.localized) continue;
        const auto& truth = scene.object(c.detection.source_object);
        const auto ref = vision::reference_centroid(scene, truth.id, k, cfg.pose);
        Rng rng(derive_seed(seed, 100 + i));
        tactile::ClipSpec spec;
        spec.object = c.detection.label;
        spec.hardness = truth.hardness;
        spec.curvature_radius_mm = truth.radius;
        spec.pose = {std::clamp((*c.centroid - ref).x(), -5.0, 5.0), std::clamp((*c.centroid - ref).y(), -5.0, 5.0),
                     uniform(rng, 0.0, 45.0)};
        spec.seed = derive_seed(seed, 200 + i);
        c.clip = tactile::make_clip(spec, cfg.gel, tactile::collection_criteria(), cfg.max_press_depth_mm);
        pressed += c.clip.has_value();
      }
      return nlohmann::json{{"contacts", pressed}};
    });

    clock.run(Stage::inference, [&] {
      std::vector<neuro::Sequence> batch;
      std::vector<std::size_t> owner;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!candidates[i].clip) continue;
        const auto prepared =
            neuro::prepare_clip(*candidates[i].clip, model.config().frames, model.config().input_size);
        batch.push_back(neuro::to_sequence(prepared));
        owner.push_back(i);
      }
      nlohmann::json out = nlohmann::json::array();
      if (!batch.empty()) {
        const auto pred = model.predict(batch);
        for (std::size_t j = 0; j < owner.size(); ++j) {
          if (!std::isfinite(pred[j])) continue;
          candidates[owner[j]].hardness = pred[j];
          out.push_back({{"label", candidates[owner[j]].detection.label}, {"hardness", pred[j]}});
        }
      }
      return nlohmann::json{{"estimates", out}};
    });
  }

  // Outcomes per ground-truth target.
  for (int id : target_ids) {
    const auto& o = scene.object(id);
    ObjectOutcome out;
    out.object_id = id;
    out.label = o.label;
    out.true_hardness = o.hardness;
    out.centroid_error_mm = kNaN;
    out.midline_error_mm = kNaN;
    const auto it = std::find_if(candidates.begin(), candidates.end(), [&](const Candidate& c) {
      return c.detection.source_object == id && c.detection.label == o.label;
    });
    if (it == candidates.end()) {
      out.failure = rec.intent ? "not detected" : "query not understood";
    } else {
      out.grounded = true;
      out.centroid_error_mm = it->error_mm;
      if (it->centroid) {
        out.midline_error_mm = vision::planar_distance(*it->centroid, o.center);
        out.position_mm = std::array<double, 2>{it->centroid->x(), it->centroid->y()};
      }
      out.localized = it->localized;
      out.measured = it->hardness.has_value();
      out.hardness_estimate = it->hardness;
      if (!out.localized) {
        out.failure = "centroid off target";
      } else if (!it->clip) {
        out.failure = "no contact";
      } else if (!out.measured) {
        out.failure = "no estimate";
      }
    }
    rec.objects.push_back(out);
  }

  clock.run(Stage::explanation, [&] {
    if (!rec.intent) {
      rec.explanation = "Sorry, I could not understand the request \"" + text + "\".";
      return nlohmann::json{{"text", rec.explanation}};
    }
    const auto& intent = *rec.intent;
    lang::ExplanationInput said;
    lang::ExplanationInput truth;
    said.intent = truth.intent = intent;
    said.workspace = truth.workspace = scene.workspace;
    said.ripeness = truth.ripeness = cfg.lang.ripeness;

    std::set<std::string> seen, measured;
    for (const auto& c : candidates) {
      seen.insert(c.detection.label);
      if (!c.hardness) continue;
      measured.insert(c.detection.label);
      said.objects.push_back({c.detection.label, c.centroid->x(), c.centroid->y(), *c.hardness});
    }
    std::vector<std::string> classes = intent.targets;
    if (intent.all_fruits()) classes.assign(seen.begin(), seen.end());
    for (const auto& cls : classes) {
      if (measured.count(cls)) continue;
      (seen.count(cls) ? said.not_measured : said.not_found).push_back(cls);
    }

    // what an annotator would accept: true labels at their reference centroids
    std::set<std::string> truth_measured;
    std::vector<std::size_t> truth_owner;
    for (std::size_t i = 0; i < rec.objects.size(); ++i) {
      const auto& out = rec.objects[i];
      if (!(out.grounded && out.measured)) continue;
      const auto ref = vision::reference_centroid(scene, out.object_id, k, cfg.pose);
      truth.objects.push_back({out.label, ref.x(), ref.y(), *out.hardness_estimate});
      truth_owner.push_back(i);
      truth_measured.insert(out.label);
    }
    std::set<std::string> truth_classes;
    for (const auto& out : rec.objects) truth_classes.insert(out.label);
    if (!intent.all_fruits()) truth_classes.insert(intent.targets.begin(), intent.targets.end());
    for (const auto& cls : truth_classes)
      if (!truth_measured.count(cls)) truth.not_found.push_back(cls);

    const auto ex = lang::compose_explanation(said, cfg.backend, cfg.lang);
    rec.explanation = ex.text;
    rec.degraded = ex.degraded;
    if (ex.degraded) rec.errors.push_back("explanation: external client unavailable, used template (" + ex.error + ")");
    const auto detail = lang::judge_detailed(rec.explanation, truth);
    rec.judge = detail.score;
    for (std::size_t j = 0; j < truth_owner.size(); ++j) rec.objects[truth_owner[j]].communicated = detail.object_correct[j];
    for (auto& out : rec.objects)
      if (out.measured && !out.communicated && out.failure.empty()) out.failure = "not communicated";
    return nlohmann::json{{"text", rec.explanation}, {"backend", lang::to_string(ex.used)}};
  });

  clock.finish();
  return rec;
}

nlohmann::json to_json(const ObjectOutcome& o) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"object_id", o.object_id},
          {"label", o.label},
          {"true_hardness", o.true_hardness},
          {"grounded", o.grounded},
          {"localized", o.localized},
          {"measured", o.measured},
          {"communicated", o.communicated},
          {"succeeded", o.succeeded()},
          {"centroid_error_mm", num(o.centroid_error_mm)},
          {"midline_error_mm", num(o.midline_error_mm)},
          {"hardness_estimate", o.hardness_estimate ? nlohmann::json(*o.hardness_estimate) : nlohmann::json(nullptr)},
          {"position_mm", o.position_mm ? nlohmann::json(*o.position_mm) : nlohmann::json(nullptr)},
          {"failure", o.failure}};
}

nlohmann::json to_json(const RunRecord& r, bool include_timings) {
  nlohmann::json objs = nlohmann::json::array();
  for (const auto& o : r.objects) objs.push_back(to_json(o));
  nlohmann::json j{{"scenario_id", r.scenario_id},
                   {"seed", r.seed},
                   {"query", r.query},
                   {"intent", r.intent ? lang::to_json(*r.intent) : nlohmann::json(nullptr)},
                   {"objects", objs},
                   {"explanation", r.explanation},
                   {"degraded", r.degraded},
                   {"judge", lang::to_json(r.judge)},
                   {"object_success_rate", r.object_success_rate()},
                   {"scenario_success", r.scenario_success()},
                   {"errors", r.errors}};
  if (include_timings) {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& s : r.timings) t.push_back({{"stage", to_string(s.stage)}, {"duration_ms", s.duration_ms}});
    j["timings"] = t;
    j["total_ms"] = r.total_ms;
  }
  return j;
}

}  // namespace tactex::pipeline
