#include "tactex/scene/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tactex/common/png_io.hpp"
#include "tactex/common/rng.hpp"

namespace tactex::scene {
namespace {

struct Hit {
  int label = kBackgroundLabel;
  double z = 0.0;
};

struct CamSphere {
  Eigen::Vector3d center;
  double r2;
  int id;
};

std::vector<CamSphere> to_camera(const Scene& scene, const CameraPose& pose) {
  std::vector<CamSphere> out;
  for (const auto& o : scene.objects) out.push_back({pose.world_to_camera(o.center), o.radius * o.radius, o.id});
  return out;
}

Hit cast(const CameraIntrinsics& k, const std::vector<CamSphere>& spheres, double table_z, int u, int v) {
  const Eigen::Vector3d d((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
  const double dd = d.squaredNorm();
  Hit hit{kBackgroundLabel, table_z};
  for (const auto& s : spheres) {
    const double b = d.dot(s.center);
    const double disc = b * b - dd * (s.center.squaredNorm() - s.r2);
    if (disc < 0.0) continue;
    const double t = (b - std::sqrt(disc)) / dd;  // d.z == 1, so t is the Z-depth
    if (t > 0.0 && t < hit.z) hit = {s.id, t};
  }
  return hit;
}

}  // namespace

Image<int> label_map(const Scene& scene, const CameraIntrinsics& k, const CameraPose& pose) {
  k.validate();
  const auto spheres = to_camera(scene, pose);
  Image<int> labels(k.width, k.height, 1, kBackgroundLabel);
  for (int v = 0; v < k.height; ++v)
    for (int u = 0; u < k.width; ++u) labels.at(u, v) = cast(k, spheres, pose.height_mm, u, v).label;
  return labels;
}

RgbdFrame render(const Scene& scene, const CameraIntrinsics& k, double sigma, std::uint64_t noise_seed, int index,
                 const CameraPose& pose) {
  if (sigma < 0.0) throw std::invalid_argument("render: depth noise sigma must be non-negative");
  k.validate();
  const auto spheres = to_camera(scene, pose);
  RgbdFrame f;
  f.index = index;
  f.color = Rgb8(k.width, k.height, 3);
  f.depth = GrayImage(k.width, k.height, 1);
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const Hit h = cast(k, spheres, pose.height_mm, u, v);
      const Rgb c = h.label == kBackgroundLabel ? kTableColor : scene.object(h.label).color;
      f.color.at(u, v, 0) = c.r;
      f.color.at(u, v, 1) = c.g;
      f.color.at(u, v, 2) = c.b;
      f.depth.at(u, v) = h.z;
    }
  }
  if (sigma == 0.0) return f;
  return with_depth_noise(f, sigma, noise_seed, index);
}

RgbdFrame with_depth_noise(const RgbdFrame& clean, double sigma, std::uint64_t noise_seed, int index) {
  if (sigma < 0.0) throw std::invalid_argument("depth noise sigma must be non-negative");
  RgbdFrame f = clean;
  f.index = index;
  if (sigma == 0.0) return f;
  Rng rng(derive_seed(noise_seed, static_cast<std::uint64_t>(index)));
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& d : f.depth.data()) d = std::max(0.0, d + noise(rng));
  return f;
}

std::vector<RgbdFrame> render_sequence(const Scene& scene, const CameraIntrinsics& k, double sigma,
                                       std::uint64_t seed, int count, const CameraPose& pose) {
  const RgbdFrame clean = render(scene, k, 0.0, 0, 0, pose);
  std::vector<RgbdFrame> frames;
  frames.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) frames.push_back(with_depth_noise(clean, sigma, seed, i));
  return frames;
}

Mask ground_truth_mask(const Scene& scene, int object_id, const CameraIntrinsics& k, const CameraPose& pose) {
  scene.object(object_id);  // throws on unknown id
  const auto labels = label_map(scene, k, pose);
  Mask m(k.width, k.height, 1, 0);
  for (int v = 0; v < k.height; ++v)
    for (int u = 0; u < k.width; ++u) m.at(u, v) = labels.at(u, v) == object_id ? 1 : 0;
  return m;
}

Image<std::uint16_t> depth_to_u16(const GrayImage& depth) {
  Image<std::uint16_t> out(depth.width(), depth.height(), 1);
  auto src = depth.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<std::uint16_t>(std::clamp(std::lround(src[i]), 0L, 65535L));
  }
  return out;
}

void export_frame(const RgbdFrame& frame, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  png::write8(dir / (stem + "_color.png"), frame.color);
  png::write16(dir / (stem + "_depth.png"), depth_to_u16(frame.depth));
}

}  // namespace tactex::scene
