#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tactex/scene/camera.hpp"
#include "tactex/stats/descriptive.hpp"
#include "tactex/stats/tests.hpp"
#include "tactex/vision/detector.hpp"
#include "tactex/vision/localize.hpp"

namespace tactex::pipeline {

struct ServoingOptions {
  int n_scenes = 40;
  double depth_noise_sigma = 2.0;
  vision::LocalizeOptions localize;
  /// Threshold the errors are tested against.
  double tolerance_mm = 5.0;
  double alpha = 0.01;
  bool ablations = true;
  scene::CameraIntrinsics intrinsics;
  scene::CameraPose pose;
  std::uint64_t seed = 0;
};

struct ProfileServoing {
  std::string name;
  int attempts = 0;
  int successes = 0;
  /// Metrics over successful attempts only.
  std::vector<double> confidence;
  std::vector<double> iou;
  std::vector<double> error_mm;
  std::vector<double> midline_mm;
  /// Same masks and frames with one step switched off.
  std::vector<double> error_no_refine_mm;
  std::vector<double> error_no_median_mm;

  double success_rate() const { return attempts ? static_cast<double>(successes) / attempts : 0.0; }
  /// One-sample t of error_mm against the tolerance.
  stats::TestResult error_vs_tolerance(double tolerance_mm, stats::Alternative alternative) const;
};

struct ServoingReport {
  ServoingOptions options;
  std::vector<ProfileServoing> profiles;
  /// Welch tests between the first two profiles, when there are two.
  std::optional<stats::TestResult> welch_confidence;
  std::optional<stats::TestResult> welch_iou;
  std::optional<stats::TestResult> welch_error;
};

/// Each object in each random scene is queried by its own label. An attempt
/// succeeds when the kept detection has the right label and the estimated
/// centroid falls inside the object's footprint.
ServoingReport evaluate_servoing(const std::vector<vision::DetectorProfile>& profiles, const ServoingOptions& options);

nlohmann::json to_json(const ServoingReport& report);

/// A one-sample t that tolerates constant samples: a zero-variance sample is
/// decided by its mean alone (p 0 or 1).
stats::TestResult one_sample_t_or_degenerate(const std::vector<double>& x, double mu0, stats::Alternative alternative);

}  // namespace tactex::pipeline
