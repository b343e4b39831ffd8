#pragma once

#include <Eigen/Core>

namespace tactex::scene {

struct CameraIntrinsics {
  double fx = 608.5;
  double fy = 606.9;
  double cx = 309.4;
  double cy = 213.83;
  int width = 640;
  int height = 480;

  /// Throws std::invalid_argument when focal lengths or principal point are out of range.
  void validate() const;
  /// Metric size of one pixel at the given depth, using the larger pixel footprint.
  double pixel_equivalent(double depth_mm) const;
};

/// Back-projects pixel (u, v) at Z-depth `depth_mm` into the camera frame.
Eigen::Vector3d project_pixel(const CameraIntrinsics& k, double u, double v, double depth_mm);

/// Forward projection of a camera-frame point; returns (u, v).
Eigen::Vector2d project_point(const CameraIntrinsics& k, const Eigen::Vector3d& p_cam);

/// Fixed top-down mounting above the table center. World frame: x to the
/// right, y away from the viewer (front to back), z up from the table surface.
/// Camera frame: X along image columns, Y along image rows, Z along the view.
struct CameraPose {
  double table_width_mm = 600.0;
  double table_depth_mm = 400.0;
  double height_mm = 600.0;

  Eigen::Vector3d world_to_camera(const Eigen::Vector3d& w) const;
  Eigen::Vector3d camera_to_world(const Eigen::Vector3d& c) const;
};

}  // namespace tactex::scene
