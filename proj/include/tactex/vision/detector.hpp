#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tactex/common/image.hpp"
#include "tactex/scene/camera.hpp"
#include "tactex/scene/render.hpp"
#include "tactex/scene/scene.hpp"

namespace tactex::vision {

/// Simulated segmentation model. Confidence is a clipped Gaussian; masks are
/// the ground-truth footprint with a smooth random boundary displacement.
struct DetectorProfile {
  std::string name = "perfect";
  double confidence_threshold = 0.0;
  double mean_confidence = 1.0;
  double confidence_spread = 0.0;
  /// RMS boundary displacement in pixels.
  double boundary_noise = 0.0;
  double miss_rate = 0.0;
  /// Text-promptable models see only prompted classes; closed-set models
  /// detect every class and are filtered afterwards.
  bool promptable = false;
  /// Probability of reporting a wrong class.
  double confusion_base = 0.0;
  /// Extra confusion per additional prompted class (promptable models only).
  double confusion_per_prompt_label = 0.0;

  void validate() const;
};

DetectorProfile yolo_like_profile();
DetectorProfile gsam_like_profile();
/// No misses, no boundary noise, confidence 1.
DetectorProfile perfect_profile();
/// Looks up "yolo-like", "gsam-like" or "perfect".
DetectorProfile profile_by_name(const std::string& name);

struct Detection {
  std::string label;
  double confidence = 0.0;
  Mask mask;
  /// Ground-truth object behind this detection (simulation bookkeeping only).
  int source_object = -1;
};

/// Pure function of its arguments. Each object draws from its own RNG stream
/// derived from (seed, object id), with the miss, confidence, confusion and
/// boundary draws taken in a fixed order so that sweeps over a single profile
/// parameter use common random numbers.
std::vector<Detection> detect(const scene::RgbdFrame& frame, const scene::Scene& scene,
                              const std::vector<std::string>& prompt_labels, const DetectorProfile& profile,
                              std::uint64_t seed, const scene::CameraIntrinsics& intrinsics = {},
                              const scene::CameraPose& pose = {});

/// Boundary perturbation used by detect(): pixels whose signed distance to the
/// mask boundary is below a smooth angular offset field with the given RMS.
Mask perturb_mask(const Mask& truth, double rms_px, std::uint64_t seed);

/// Keeps the highest-confidence detection per label (ties: lower source id).
std::vector<Detection> best_per_label(const std::vector<Detection>& detections);

}  // namespace tactex::vision
