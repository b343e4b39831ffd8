#include "tactex/tactile/gel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tactex/common/rng.hpp"

namespace tactex::tactile {
namespace {

void check_pose(const PoseOffset& pose) {
  if (std::fabs(pose.dx_mm) > 5.0 || std::fabs(pose.dy_mm) > 5.0) {
    throw std::invalid_argument("press: position offset beyond +-5 mm");
  }
  if (pose.yaw_deg < 0.0 || pose.yaw_deg > 45.0) throw std::invalid_argument("press: yaw outside [0, 45] deg");
}

// Background: blurred white noise plus a linear illumination gradient.
GrayImage background(const GelConfig& gel) {
  Rng rng(gel.texture_seed);
  const int w = gel.width, h = gel.height;
  GrayImage raw(w, h);
  for (double& v : raw.data()) v = gaussian(rng, 0.0, 1.0);
  GrayImage blur(w, h);
  double ss = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int oy = -1; oy <= 1; ++oy)
        for (int ox = -1; ox <= 1; ++ox) {
          const double wgt = (ox == 0 ? 2.0 : 1.0) * (oy == 0 ? 2.0 : 1.0);
          s += wgt * raw.at(std::clamp(x + ox, 0, w - 1), std::clamp(y + oy, 0, h - 1));
        }
      blur.at(x, y) = s / 16.0;
      ss += blur.at(x, y) * blur.at(x, y);
    }
  const double scale = gel.texture_std / std::sqrt(ss / static_cast<double>(w * h));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double grad = 20.0 * (static_cast<double>(x) / w - 0.5) - 10.0 * (static_cast<double>(y) / h - 0.5);
      blur.at(x, y) = gel.base_intensity + grad + scale * blur.at(x, y);
    }
  return blur;
}

}  // namespace

void GelConfig::validate() const {
  if (!(gel_stiffness > 0.0)) throw std::invalid_argument("gel: stiffness must be positive");
  if (width <= 0 || height <= 0 || marker_rows <= 0 || marker_cols <= 0) {
    throw std::invalid_argument("gel: invalid image or marker grid size");
  }
  if ((marker_cols - 1) * marker_spacing_px >= width || (marker_rows - 1) * marker_spacing_px >= height) {
    throw std::invalid_argument("gel: marker grid does not fit inside the image");
  }
  if (sensor_noise_sigma < 0.0) throw std::invalid_argument("gel: noise sigma must be >= 0");
}

double gel_indentation(double depth_mm, double hardness, const GelConfig& gel) {
  if (depth_mm <= 0.0) return 0.0;
  const double k = object_stiffness(hardness);
  return depth_mm * k / (k + gel.gel_stiffness);
}

std::vector<Eigen::Vector2d> rest_markers(const GelConfig& gel) {
  std::vector<Eigen::Vector2d> out;
  const double x0 = 0.5 * (gel.width - 1) - 0.5 * (gel.marker_cols - 1) * gel.marker_spacing_px;
  const double y0 = 0.5 * (gel.height - 1) - 0.5 * (gel.marker_rows - 1) * gel.marker_spacing_px;
  for (int r = 0; r < gel.marker_rows; ++r)
    for (int c = 0; c < gel.marker_cols; ++c) out.emplace_back(x0 + c * gel.marker_spacing_px, y0 + r * gel.marker_spacing_px);
  return out;
}

TactileFrame capture(double hardness, const PoseOffset& pose, const GelConfig& gel, double depth_mm,
                     std::uint64_t noise_seed, double curvature_radius_mm) {
  gel.validate();
  check_pose(pose);
  if (hardness < 0.0 || hardness > 100.0) throw std::invalid_argument("press: hardness outside [0, 100]");
  const double delta = gel_indentation(depth_mm, hardness, gel);
  const Eigen::Vector2d contact(0.5 * (gel.width - 1) + pose.dx_mm * gel.px_per_mm,
                                0.5 * (gel.height - 1) + pose.dy_mm * gel.px_per_mm);

  TactileFrame f;
  f.indentation_depth = depth_mm;
  GrayImage img = background(gel);

  if (delta > 0.0) {
    const double width = gel.bump_base_width_px +
                         gel.bump_hertz_scale * gel.px_per_mm * std::sqrt(curvature_radius_mm * delta);
    const double wa = width * std::sqrt(gel.bump_anisotropy);
    const double wb = width / std::sqrt(gel.bump_anisotropy);
    const double yaw = pose.yaw_deg * M_PI / 180.0;
    const double cs = std::cos(yaw), sn = std::sin(yaw);
    const double amp = gel.intensity_gain * delta;
    for (int y = 0; y < gel.height; ++y)
      for (int x = 0; x < gel.width; ++x) {
        const double px = x - contact.x(), py = y - contact.y();
        const double a = cs * px + sn * py;
        const double b = -sn * px + cs * py;
        img.at(x, y) += amp * std::exp(-0.5 * (a * a / (wa * wa) + b * b / (wb * wb)));
      }
  }

  for (const auto& m : rest_markers(gel)) {
    const Eigen::Vector2d r = m - contact;
    const double dist = r.norm();
    Eigen::Vector2d pos = m;
    if (delta > 0.0 && dist > 0.0) {
      const double mag = gel.marker_gain * delta *
                         std::exp(-0.5 * dist * dist / (gel.marker_field_sigma_px * gel.marker_field_sigma_px));
      pos += mag * r / dist;
    }
    f.markers.push_back(pos);
    const int reach = static_cast<int>(std::ceil(3.5 * gel.marker_sigma_px));
    const int cx = static_cast<int>(std::lround(pos.x())), cy = static_cast<int>(std::lround(pos.y()));
    for (int y = cy - reach; y <= cy + reach; ++y)
      for (int x = cx - reach; x <= cx + reach; ++x) {
        if (!img.contains(x, y)) continue;
        const double d2 = (x - pos.x()) * (x - pos.x()) + (y - pos.y()) * (y - pos.y());
        img.at(x, y) -= gel.marker_depth * std::exp(-0.5 * d2 / (gel.marker_sigma_px * gel.marker_sigma_px));
      }
  }

  Rng rng(noise_seed);
  std::normal_distribution<double> noise(0.0, gel.sensor_noise_sigma > 0 ? gel.sensor_noise_sigma : 1.0);
  f.image = Gray8(gel.width, gel.height);
  auto src = img.data();
  auto dst = f.image.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double v = src[i] + (gel.sensor_noise_sigma > 0 ? noise(rng) : 0.0);
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return f;
}

PressStream press(double hardness, const PoseOffset& pose, const GelConfig& gel, double max_depth_mm,
                  std::uint64_t seed, double curvature_radius_mm) {
  if (max_depth_mm < 0.0) throw std::invalid_argument("press: max depth must be >= 0");
  PressStream s;
  s.reference = capture(hardness, pose, gel, 0.0, derive_seed(seed, 0), curvature_radius_mm);
  const int steps = static_cast<int>(std::floor(max_depth_mm / kStepMm + 1e-9));
  for (int k = 0; k <= steps; ++k) {
    s.frames.push_back(capture(hardness, pose, gel, k * kStepMm, derive_seed(seed, static_cast<std::uint64_t>(k) + 1),
                               curvature_radius_mm));
  }
  return s;
}

double mean_marker_displacement(const TactileFrame& frame, const TactileFrame& reference) {
  if (frame.markers.size() != reference.markers.size() || frame.markers.empty()) {
    throw std::invalid_argument("marker lists differ in size");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < frame.markers.size(); ++i) s += (frame.markers[i] - reference.markers[i]).norm();
  return s / static_cast<double>(frame.markers.size());
}

}  // namespace tactex::tactile
