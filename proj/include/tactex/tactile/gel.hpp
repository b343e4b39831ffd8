#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "tactex/common/image.hpp"

namespace tactex::tactile {

inline constexpr double kStepMm = 0.25;

struct GelConfig {
  int width = 128;
  int height = 128;
  int marker_rows = 9;
  int marker_cols = 9;
  double marker_spacing_px = 13.0;
  double gel_stiffness = 75.0;
  /// Bump amplitude in intensity units per mm of gel indentation.
  double intensity_gain = 50.0;
  double sensor_noise_sigma = 1.5;
  double px_per_mm = 4.0;
  /// Bump width: base + hertz_scale * px_per_mm * sqrt(R * delta).
  double bump_base_width_px = 4.0;
  double bump_hertz_scale = 0.8;
  /// Width ratio of the contact ellipse (major / minor), oriented by yaw.
  double bump_anisotropy = 1.3;
  /// Peak marker displacement in px per mm of gel indentation.
  double marker_gain = 13.0;
  /// Spatial extent (Gaussian sigma) of the marker displacement field.
  double marker_field_sigma_px = 90.0;
  double marker_depth = 70.0;
  double marker_sigma_px = 4.0;
  /// Fixed-pattern background shared by every capture of this sensor.
  double texture_std = 18.0;
  double base_intensity = 110.0;
  std::uint64_t texture_seed = 0x6e1;

  void validate() const;
};

/// Stiffness map of object hardness (unit slope).
inline double object_stiffness(double hardness) { return hardness; }

/// Series-spring gel indentation for a commanded press depth.
double gel_indentation(double depth_mm, double hardness, const GelConfig& gel);

struct PoseOffset {
  double dx_mm = 0.0;
  double dy_mm = 0.0;
  double yaw_deg = 0.0;
};

struct TactileFrame {
  Gray8 image;
  std::vector<Eigen::Vector2d> markers;
  /// Commanded press depth at capture, mm.
  double indentation_depth = 0.0;
};

struct PressStream {
  /// Pre-contact capture.
  TactileFrame reference;
  /// frames[k] is captured at commanded depth k * 0.25 mm.
  std::vector<TactileFrame> frames;
};

/// Rest positions of the marker grid, centred in the image.
std::vector<Eigen::Vector2d> rest_markers(const GelConfig& gel);

/// Top-down press in 0.25 mm steps from 0 to max_depth. `curvature_radius_mm`
/// is the local radius of the pressed surface. Deterministic per seed.
PressStream press(double hardness, const PoseOffset& pose, const GelConfig& gel, double max_depth_mm,
                  std::uint64_t seed, double curvature_radius_mm = 30.0);

/// One capture at a given commanded depth; `noise_seed` drives sensor noise.
TactileFrame capture(double hardness, const PoseOffset& pose, const GelConfig& gel, double depth_mm,
                     std::uint64_t noise_seed, double curvature_radius_mm = 30.0);

double mean_marker_displacement(const TactileFrame& frame, const TactileFrame& reference);

}  // namespace tactex::tactile
