#include "tactex/vision/detector.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "tactex/common/rng.hpp"
#include "tactex/vision/mask_ops.hpp"

namespace tactex::vision {
namespace {

constexpr int kHarmonics = 4;

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

void DetectorProfile::validate() const {
  if (!in_unit(confidence_threshold) || !in_unit(mean_confidence) || !in_unit(confidence_spread) ||
      !in_unit(miss_rate) || !in_unit(confusion_base) || !in_unit(confusion_per_prompt_label)) {
    throw std::invalid_argument("detector profile: probabilities must lie in [0, 1]");
  }
  if (boundary_noise < 0.0) throw std::invalid_argument("detector profile: boundary noise must be >= 0");
}

DetectorProfile yolo_like_profile() {
  DetectorProfile p;
  p.name = "yolo-like";
  p.confidence_threshold = 0.40;
  p.mean_confidence = 0.92;
  p.confidence_spread = 0.05;
  p.boundary_noise = 5.9;
  p.miss_rate = 0.10;
  p.promptable = false;
  p.confusion_base = 0.01;
  return p;
}

DetectorProfile gsam_like_profile() {
  DetectorProfile p;
  p.name = "gsam-like";
  p.confidence_threshold = 0.60;
  p.mean_confidence = 0.65;
  p.confidence_spread = 0.04;
  p.boundary_noise = 1.8;
  p.miss_rate = 0.04;
  p.promptable = true;
  p.confusion_per_prompt_label = 0.004;
  return p;
}

DetectorProfile perfect_profile() { return DetectorProfile{}; }

DetectorProfile profile_by_name(const std::string& name) {
  if (name == "yolo-like") return yolo_like_profile();
  if (name == "gsam-like") return gsam_like_profile();
  if (name == "perfect") return perfect_profile();
  throw std::invalid_argument("unknown detector profile: " + name);
}

Mask perturb_mask(const Mask& truth, double rms_px, std::uint64_t seed) {
  if (rms_px <= 0.0 || mask_area(truth) == 0) return truth;
  Rng rng(seed);
  // offset(theta) = b + sum_k a_k cos(k theta + phi_k); E[offset^2] = rms^2
  const double b = gaussian(rng, 0.0, rms_px / std::sqrt(2.0));
  double a[kHarmonics], phi[kHarmonics];
  for (int k = 0; k < kHarmonics; ++k) {
    a[k] = gaussian(rng, 0.0, rms_px / std::sqrt(kHarmonics));
    phi[k] = uniform(rng, 0.0, 2.0 * M_PI);
  }
  const double limit = 4.0 * rms_px;
  const auto c = mask_centroid(truth);

  Mask outside(truth.width(), truth.height(), 1, 0);
  auto t = truth.data();
  auto o = outside.data();
  for (std::size_t i = 0; i < t.size(); ++i) o[i] = t[i] ? 0 : 1;
  const GrayImage dist_in = distance_to_set(truth);     // > 0 outside the object
  const GrayImage dist_out = distance_to_set(outside);  // > 0 inside the object

  Mask out(truth.width(), truth.height(), 1, 0);
  for (int y = 0; y < truth.height(); ++y) {
    for (int x = 0; x < truth.width(); ++x) {
      const double sd = truth.at(x, y) ? -dist_out.at(x, y) : dist_in.at(x, y);
      if (sd > limit + 1.0) continue;
      const double theta = std::atan2(y - c.v, x - c.u);
      double off = b;
      for (int k = 0; k < kHarmonics; ++k) off += a[k] * std::cos((k + 1) * theta + phi[k]);
      off = std::clamp(off, -limit, limit);
      // sd is <= -1 inside and >= 1 outside, so a zero offset reproduces the truth
      if (sd < off) out.at(x, y) = 1;
    }
  }
  return out;
}

std::vector<Detection> detect(const scene::RgbdFrame& frame, const scene::Scene& scene,
                              const std::vector<std::string>& prompt_labels, const DetectorProfile& profile,
                              std::uint64_t seed, const scene::CameraIntrinsics& intrinsics,
                              const scene::CameraPose& pose) {
  profile.validate();
  if (profile.promptable && prompt_labels.empty()) {
    throw std::invalid_argument("detect: a promptable detector needs at least one prompt label");
  }
  if (frame.color.width() != intrinsics.width || frame.color.height() != intrinsics.height) {
    throw std::invalid_argument("detect: frame size does not match intrinsics");
  }
  const auto labels = scene::label_map(scene, intrinsics, pose);
  const auto lexicon = scene::fruit_lexicon();
  auto prompted = [&](const std::string& l) {
    return std::find(prompt_labels.begin(), prompt_labels.end(), l) != prompt_labels.end();
  };
  double confusion = profile.confusion_base;
  if (profile.promptable && prompt_labels.size() > 1) {
    confusion += profile.confusion_per_prompt_label * static_cast<double>(prompt_labels.size() - 1);
  }
  confusion = std::min(confusion, 1.0);

  std::vector<Detection> out;
  for (const auto& obj : scene.objects) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(obj.id) + 1));
    const double u_miss = uniform(rng, 0.0, 1.0);
    const double z_conf = gaussian(rng, 0.0, 1.0);
    const double u_confuse = uniform(rng, 0.0, 1.0);
    const double u_pick = uniform(rng, 0.0, 1.0);
    const std::uint64_t mask_seed = rng();

    std::string label = obj.label;
    if (u_confuse < confusion) {
      // promptable models can only answer with a prompted class
      std::vector<std::string> pool;
      for (const auto& l : profile.promptable ? prompt_labels : lexicon)
        if (l != obj.label) pool.push_back(l);
      if (!pool.empty()) label = pool[std::min(pool.size() - 1, static_cast<std::size_t>(u_pick * pool.size()))];
    }
    if (profile.promptable && !prompted(label)) continue;
    if (u_miss < profile.miss_rate) continue;
    const double conf = std::clamp(profile.mean_confidence + profile.confidence_spread * z_conf, 0.0, 1.0);
    if (conf < profile.confidence_threshold) continue;

    Mask truth(intrinsics.width, intrinsics.height, 1, 0);
    for (int v = 0; v < intrinsics.height; ++v)
      for (int u = 0; u < intrinsics.width; ++u) truth.at(u, v) = labels.at(u, v) == obj.id ? 1 : 0;
    if (mask_area(truth) == 0) continue;  // outside the frustum
    Mask mask = perturb_mask(truth, profile.boundary_noise, mask_seed);
    if (mask_area(mask) == 0) continue;
    out.push_back({label, conf, std::move(mask), obj.id});
  }
  // closed-set models are filtered by the parsed query after detection
  if (!profile.promptable && !prompt_labels.empty()) {
    std::erase_if(out, [&](const Detection& d) { return !prompted(d.label); });
  }
  return out;
}

std::vector<Detection> best_per_label(const std::vector<Detection>& detections) {
  std::map<std::string, const Detection*> best;
  for (const auto& d : detections) {
    auto& slot = best[d.label];
    if (!slot || d.confidence > slot->confidence ||
        (d.confidence == slot->confidence && d.source_object < slot->source_object)) {
      slot = &d;
    }
  }
  std::vector<Detection> out;
  for (const auto& d : detections)
    if (best[d.label] == &d) out.push_back(d);
  return out;
}

}  // namespace tactex::vision
