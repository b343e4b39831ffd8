#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tactex/lang/client.hpp"
#include "tactex/lang/config.hpp"
#include "tactex/lang/intent.hpp"
#include "tactex/lang/judge.hpp"
#include "tactex/neuro/model.hpp"
#include "tactex/scene/camera.hpp"
#include "tactex/scene/scene.hpp"
#include "tactex/tactile/gel.hpp"
#include "tactex/vision/detector.hpp"
#include "tactex/vision/localize.hpp"

namespace tactex::pipeline {

enum class Stage { parse, detect, centroid, tactile_collection, inference, explanation };
inline constexpr std::array<Stage, 6> kStages{Stage::parse,      Stage::detect,    Stage::centroid,
                                              Stage::tactile_collection, Stage::inference, Stage::explanation};

std::string to_string(Stage s);

struct StageTiming {
  Stage stage = Stage::parse;
  double duration_ms = 0.0;
};

struct ObjectOutcome {
  int object_id = -1;
  std::string label;
  double true_hardness = 0.0;
  bool grounded = false;
  bool localized = false;
  bool measured = false;
  bool communicated = false;
  /// Planar distance to the reference centroid; NaN when not grounded.
  double centroid_error_mm = 0.0;
  /// Planar distance to the object's true center; NaN when not grounded.
  double midline_error_mm = 0.0;
  std::optional<double> hardness_estimate;
  /// Estimated table-plane position (x, y) in mm, when localized at all.
  std::optional<std::array<double, 2>> position_mm;
  std::string failure;

  bool succeeded() const { return grounded && localized && measured && communicated; }
};

struct RunRecord {
  int scenario_id = 0;
  std::uint64_t seed = 0;
  std::string query;
  std::optional<lang::Intent> intent;
  /// One entry per ground-truth target, in scene id order.
  std::vector<ObjectOutcome> objects;
  std::vector<StageTiming> timings;
  double total_ms = 0.0;
  std::string explanation;
  bool degraded = false;
  lang::JudgeScore judge;
  std::vector<std::string> errors;

  double object_success_rate() const;
  bool scenario_success() const;
  double stage_sum_ms() const;
};

struct PipelineConfig {
  vision::DetectorProfile detector = vision::gsam_like_profile();
  double depth_noise_sigma = 2.0;
  vision::LocalizeOptions localize;
  /// Objects farther than this from their reference centroid are not localized.
  double localize_tolerance_mm = 5.0;
  /// Fault injection: added to every estimated centroid (x, y).
  double centroid_offset_x_mm = 0.0;
  double centroid_offset_y_mm = 0.0;
  tactile::GelConfig gel;
  double max_press_depth_mm = 5.0;
  lang::LangConfig lang = lang::default_lang_config();
  lang::Backend backend = lang::Backend::template_engine;
  scene::CameraIntrinsics intrinsics;
  scene::CameraPose pose;
};

/// Receives {"type":"stage","stage":..,"status":"started"|"finished",..} events in order.
using EventSink = std::function<void(const nlohmann::json&)>;

/// Parse, detect, localize, press, estimate and explain. Stage failures are
/// recorded on the run; nothing is thrown past this function.
RunRecord run_query(const scene::Scene& scene, const std::string& text, const neuro::HardnessModel& model,
                    const PipelineConfig& config, std::uint64_t seed, const EventSink& sink = {});

/// Timings and wall-clock fields are left out unless requested, so reports stay reproducible.
nlohmann::json to_json(const RunRecord& record, bool include_timings);
nlohmann::json to_json(const ObjectOutcome& outcome);

/// FNV-1a of the compact JSON dump, as 16 hex digits.
std::string payload_digest(const nlohmann::json& payload);

}  // namespace tactex::pipeline
