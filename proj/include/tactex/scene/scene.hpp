#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "tactex/scene/camera.hpp"

namespace tactex::scene {

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Workspace {
  double x_min = 0.0;
  double x_max = 600.0;
  double y_min = 0.0;
  double y_max = 400.0;

  bool contains(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
  bool operator==(const Workspace&) const = default;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

/// A fruit modelled as a sphere resting on the table: center.z == radius.
struct SceneObject {
  int id = 0;
  std::string label;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.0;
  Rgb color;
  double hardness = 0.0;

  bool operator==(const SceneObject& o) const {
    return id == o.id && label == o.label && center == o.center && radius == o.radius && color == o.color &&
           hardness == o.hardness;
  }
};

struct Scene {
  std::vector<SceneObject> objects;
  Workspace workspace;
  std::uint64_t seed = 0;

  const SceneObject& object(int id) const;
  bool operator==(const Scene&) const = default;
};

struct ClassPrior {
  double radius_mm = 35.0;
  Rgb color;
  double hardness_min = 60.0;
  double hardness_max = 90.0;
};

/// The closed fruit lexicon with default size/color/hardness priors.
const std::map<std::string, ClassPrior>& default_class_priors();
std::vector<std::string> fruit_lexicon();
bool is_fruit(const std::string& label);

struct SceneConfig {
  CameraIntrinsics intrinsics;
  CameraPose pose;
  Workspace workspace;
  std::map<std::string, ClassPrior> priors = default_class_priors();
  /// Relative radius jitter (uniform +-).
  double radius_jitter = 0.08;
  /// Angular clearance between object silhouettes, in pixels at the focal length.
  double silhouette_gap_px = 8.0;
  /// Minimum distance of every silhouette from the image border, in pixels.
  double frustum_margin_px = 6.0;
  int max_attempts = 5000;
};

/// Random scene of n objects (1..6), or a random count when n is empty.
/// Pure function of (seed, n, config). Silhouettes seen from the camera are
/// pairwise disjoint, which also rules out overlapping spheres.
Scene generate_scene(std::uint64_t seed, std::optional<int> n_objects, const SceneConfig& config = {});

/// Same placement rules with a caller-fixed class roster.
Scene generate_scene_with_labels(std::uint64_t seed, const std::vector<std::string>& labels,
                                 const SceneConfig& config = {});

/// Checks the object/scene invariants; throws SceneError on violation.
void validate_scene(const Scene& scene);

nlohmann::json to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);

}  // namespace tactex::scene
