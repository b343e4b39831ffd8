#include "tactex/scene/camera.hpp"

#include <algorithm>
#include <stdexcept>

namespace tactex::scene {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("intrinsics: focal lengths must be positive");
  if (width <= 0 || height <= 0) throw std::invalid_argument("intrinsics: image size must be positive");
  if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height)) {
    throw std::invalid_argument("intrinsics: principal point outside the image");
  }
}

double CameraIntrinsics::pixel_equivalent(double depth_mm) const { return depth_mm / std::min(fx, fy); }

Eigen::Vector3d project_pixel(const CameraIntrinsics& k, double u, double v, double depth_mm) {
  if (!(depth_mm > 0.0)) throw std::invalid_argument("project_pixel: depth must be positive");
  return {depth_mm * (u - k.cx) / k.fx, depth_mm * (v - k.cy) / k.fy, depth_mm};
}

Eigen::Vector2d project_point(const CameraIntrinsics& k, const Eigen::Vector3d& p) {
  if (!(p.z() > 0.0)) throw std::invalid_argument("project_point: point behind the camera");
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

// Front of the table (small y) appears at the bottom of the image.
Eigen::Vector3d CameraPose::world_to_camera(const Eigen::Vector3d& w) const {
  return {w.x() - 0.5 * table_width_mm, 0.5 * table_depth_mm - w.y(), height_mm - w.z()};
}

Eigen::Vector3d CameraPose::camera_to_world(const Eigen::Vector3d& c) const {
  return {c.x() + 0.5 * table_width_mm, 0.5 * table_depth_mm - c.y(), height_mm - c.z()};
}

}  // namespace tactex::scene
