#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "tactex/common/image.hpp"
#include "tactex/scene/camera.hpp"
#include "tactex/scene/render.hpp"
#include "tactex/scene/scene.hpp"
#include "tactex/vision/mask_ops.hpp"

namespace tactex::vision {

inline constexpr int kDepthFrames = 10;

/// Per-pixel median over the frames at masked pixels (0 elsewhere). Needs at
/// least 10 frames of a static scene.
GrayImage median_depth(const std::vector<scene::RgbdFrame>& frames, const Mask& mask);

/// Coordinate-wise median of the back-projected masked pixels, camera frame.
/// Pixels with non-positive depth are skipped.
Eigen::Vector3d centroid3d(const Mask& inner_mask, const GrayImage& depth, const scene::CameraIntrinsics& k);
/// Mean-based variant, used as a baseline in tests and ablations.
Eigen::Vector3d mean_centroid3d(const Mask& inner_mask, const GrayImage& depth, const scene::CameraIntrinsics& k);

struct LocalizeOptions {
  bool refine = true;
  bool temporal_median = true;
  CannyParams canny;
};

struct Localization {
  Eigen::Vector3d centroid_world = Eigen::Vector3d::Zero();
  Mask inner_mask;
  bool refine_fallback = false;
};

/// Mask once, then depth from the frames: refine -> median depth -> centroid.
/// With temporal_median off only the first frame is used.
Localization localize(const Mask& mask, const std::vector<scene::RgbdFrame>& frames,
                      const scene::CameraIntrinsics& k, const scene::CameraPose& pose,
                      const LocalizeOptions& options = {});

/// The centroid the pipeline reports for an object under ideal sensing:
/// ground-truth mask, noiseless depth. Localization errors are measured
/// against this point.
Eigen::Vector3d reference_centroid(const scene::Scene& scene, int object_id, const scene::CameraIntrinsics& k,
                                   const scene::CameraPose& pose = {});

/// Horizontal (table-plane) distance in mm.
double planar_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

struct GroundedObject {
  std::string label;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  Mask inner_mask;
  double confidence = 0.0;
  int source_object = -1;
  bool refine_fallback = false;
  bool inside_workspace = true;
};

}  // namespace tactex::vision
