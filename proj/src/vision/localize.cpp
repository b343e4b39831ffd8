#include "tactex/vision/localize.hpp"

#include <algorithm>
#include <stdexcept>

#include "tactex/stats/descriptive.hpp"

namespace tactex::vision {

GrayImage median_depth(const std::vector<scene::RgbdFrame>& frames, const Mask& mask) {
  if (frames.size() < static_cast<std::size_t>(kDepthFrames)) {
    throw std::invalid_argument("median_depth: need at least 10 frames");
  }
  for (const auto& f : frames) {
    if (!f.depth.same_size(mask)) throw std::invalid_argument("median_depth: frame and mask sizes differ");
  }
  GrayImage out(mask.width(), mask.height(), 1, 0.0);
  std::vector<double> samples(frames.size());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      for (std::size_t i = 0; i < frames.size(); ++i) samples[i] = frames[i].depth.at(x, y);
      out.at(x, y) = stats::median(samples);
    }
  }
  return out;
}

namespace {

struct Points {
  std::vector<double> x, y, z;
};

Points back_project(const Mask& mask, const GrayImage& depth, const scene::CameraIntrinsics& k) {
  if (!depth.same_size(mask)) throw std::invalid_argument("centroid3d: mask and depth sizes differ");
  Points p;
  for (int v = 0; v < mask.height(); ++v)
    for (int u = 0; u < mask.width(); ++u) {
      if (!mask.at(u, v) || !(depth.at(u, v) > 0.0)) continue;
      const auto q = scene::project_pixel(k, u, v, depth.at(u, v));
      p.x.push_back(q.x());
      p.y.push_back(q.y());
      p.z.push_back(q.z());
    }
  if (p.x.empty()) throw std::invalid_argument("centroid3d: no masked pixel with valid depth");
  return p;
}

}  // namespace

Eigen::Vector3d centroid3d(const Mask& inner_mask, const GrayImage& depth, const scene::CameraIntrinsics& k) {
  const Points p = back_project(inner_mask, depth, k);
  return {stats::median(p.x), stats::median(p.y), stats::median(p.z)};
}

Eigen::Vector3d mean_centroid3d(const Mask& inner_mask, const GrayImage& depth, const scene::CameraIntrinsics& k) {
  const Points p = back_project(inner_mask, depth, k);
  return {stats::mean(p.x), stats::mean(p.y), stats::mean(p.z)};
}

Localization localize(const Mask& mask, const std::vector<scene::RgbdFrame>& frames, const scene::CameraIntrinsics& k,
                      const scene::CameraPose& pose, const LocalizeOptions& options) {
  if (frames.empty()) throw std::invalid_argument("localize: no depth frames");
  Localization out;
  if (options.refine) {
    auto refined = refine_mask(mask, options.canny);
    out.inner_mask = std::move(refined.mask);
    out.refine_fallback = refined.fallback;
  } else {
    out.inner_mask = mask;
  }
  const GrayImage depth = options.temporal_median ? median_depth(frames, out.inner_mask) : frames.front().depth;
  out.centroid_world = pose.camera_to_world(centroid3d(out.inner_mask, depth, k));
  return out;
}

Eigen::Vector3d reference_centroid(const scene::Scene& scene, int object_id, const scene::CameraIntrinsics& k,
                                   const scene::CameraPose& pose) {
  const Mask truth = scene::ground_truth_mask(scene, object_id, k, pose);
  const auto clean = scene::render(scene, k, 0.0, 0, 0, pose);
  const Mask inner = refine_mask(truth).mask;
  return pose.camera_to_world(centroid3d(inner, clean.depth, k));
}

double planar_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::hypot(a.x() - b.x(), a.y() - b.y());
}

}  // namespace tactex::vision
