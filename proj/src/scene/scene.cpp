#include "tactex/scene/scene.hpp"

#include <algorithm>
#include <cmath>

#include "tactex/common/rng.hpp"

namespace tactex::scene {
namespace {

constexpr int kMaxObjects = 6;

// Signed distance of a camera-frame point from the nearest side plane of the
// image frustum; negative means outside.
double frustum_clearance(const CameraIntrinsics& k, const Eigen::Vector3d& p) {
  const double w = static_cast<double>(k.width - 1);
  const double h = static_cast<double>(k.height - 1);
  // a * (X or Y) + c * Z >= 0 on the inside of each plane
  auto dist = [&](double a, double lateral, double c) { return (a * lateral + c * p.z()) / std::hypot(a, c); };
  return std::min({dist(k.fx, p.x(), k.cx), dist(-k.fx, p.x(), w - k.cx), dist(k.fy, p.y(), k.cy),
                   dist(-k.fy, p.y(), h - k.cy)});
}

bool silhouettes_disjoint(const Eigen::Vector3d& a, double ra, const Eigen::Vector3d& b, double rb, double gap_rad) {
  const double half_a = std::asin(ra / a.norm());
  const double half_b = std::asin(rb / b.norm());
  const double angle = std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0));
  return angle > half_a + half_b + gap_rad;
}

Scene place(std::uint64_t seed, const std::vector<std::string>& labels, const SceneConfig& cfg, Rng& rng) {
  cfg.intrinsics.validate();
  if (labels.empty() || static_cast<int>(labels.size()) > kMaxObjects) {
    throw SceneError("scene must contain between 1 and 6 objects");
  }
  Scene scene;
  scene.workspace = cfg.workspace;
  scene.seed = seed;
  const double gap_rad = cfg.silhouette_gap_px / cfg.intrinsics.fx;
  std::vector<Eigen::Vector3d> cam_centers;
  int attempts = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = cfg.priors.find(labels[i]);
    if (it == cfg.priors.end()) throw SceneError("unknown fruit class: " + labels[i]);
    const ClassPrior& prior = it->second;
    const double radius = prior.radius_mm * uniform(rng, 1.0 - cfg.radius_jitter, 1.0 + cfg.radius_jitter);
    const double hardness = uniform(rng, prior.hardness_min, prior.hardness_max);
    bool placed = false;
    while (!placed) {
      if (++attempts > cfg.max_attempts) throw SceneError("placement failed: workspace too crowded");
      const double x = uniform(rng, cfg.workspace.x_min + radius, cfg.workspace.x_max - radius);
      const double y = uniform(rng, cfg.workspace.y_min + radius, cfg.workspace.y_max - radius);
      const Eigen::Vector3d center(x, y, radius);
      const Eigen::Vector3d cam = cfg.pose.world_to_camera(center);
      const double margin_mm = cfg.frustum_margin_px * cam.z() / cfg.intrinsics.fx;
      if (frustum_clearance(cfg.intrinsics, cam) < radius + margin_mm) continue;
      bool ok = true;
      for (std::size_t j = 0; j < cam_centers.size() && ok; ++j) {
        ok = silhouettes_disjoint(cam, radius, cam_centers[j], scene.objects[j].radius, gap_rad);
      }
      if (!ok) continue;
      cam_centers.push_back(cam);
      scene.objects.push_back({static_cast<int>(i), labels[i], center, radius, prior.color, hardness});
      placed = true;
    }
  }
  return scene;
}

}  // namespace

const SceneObject& Scene::object(int id) const {
  for (const auto& o : objects)
    if (o.id == id) return o;
  throw SceneError("unknown object id " + std::to_string(id));
}

const std::map<std::string, ClassPrior>& default_class_priors() {
  static const std::map<std::string, ClassPrior> priors{
      {"apple", {38.0, {190, 30, 40}, 62.0, 90.0}},    {"avocado", {36.0, {60, 80, 30}, 60.0, 85.0}},
      {"banana", {34.0, {235, 205, 60}, 60.0, 85.0}},  {"kiwi", {27.0, {130, 100, 60}, 60.0, 90.0}},
      {"lemon", {29.0, {250, 230, 70}, 62.0, 90.0}},   {"lime", {25.0, {110, 180, 50}, 62.0, 90.0}},
      {"mango", {42.0, {240, 160, 50}, 60.0, 85.0}},   {"orange", {38.0, {245, 140, 30}, 60.0, 90.0}},
      {"pear", {36.0, {200, 210, 90}, 60.0, 90.0}},    {"tomato", {31.0, {220, 50, 40}, 60.0, 85.0}},
  };
  return priors;
}

std::vector<std::string> fruit_lexicon() {
  std::vector<std::string> out;
  for (const auto& [name, prior] : default_class_priors()) out.push_back(name);
  return out;
}

bool is_fruit(const std::string& label) { return default_class_priors().count(label) != 0; }

Scene generate_scene(std::uint64_t seed, std::optional<int> n_objects, const SceneConfig& config) {
  Rng rng(derive_seed(seed, 0x5ce4e));
  const int n = n_objects ? *n_objects : std::uniform_int_distribution<int>(1, kMaxObjects)(rng);
  if (n < 1 || n > kMaxObjects) throw SceneError("n_objects must lie in [1, 6]");
  std::vector<std::string> names;
  for (const auto& [name, prior] : config.priors) names.push_back(name);
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) {
    labels.push_back(names[std::uniform_int_distribution<std::size_t>(0, names.size() - 1)(rng)]);
  }
  return place(seed, labels, config, rng);
}

Scene generate_scene_with_labels(std::uint64_t seed, const std::vector<std::string>& labels,
                                 const SceneConfig& config) {
  Rng rng(derive_seed(seed, 0x1abe1));
  return place(seed, labels, config, rng);
}

void validate_scene(const Scene& scene) {
  if (scene.objects.empty() || scene.objects.size() > kMaxObjects) {
    throw SceneError("scene must contain between 1 and 6 objects");
  }
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& a = scene.objects[i];
    if (!(a.radius > 0.0)) throw SceneError("object radius must be positive");
    if (a.hardness < 0.0 || a.hardness > 100.0) throw SceneError("hardness outside [0, 100]");
    if (!scene.workspace.contains(a.center.x(), a.center.y())) throw SceneError("object center outside workspace");
    for (std::size_t j = i + 1; j < scene.objects.size(); ++j) {
      const auto& b = scene.objects[j];
      if ((a.center - b.center).norm() <= a.radius + b.radius) throw SceneError("objects overlap");
    }
  }
}

nlohmann::json to_json(const Scene& scene) {
  nlohmann::json j;
  j["seed"] = scene.seed;
  j["workspace"] = {{"x_min", scene.workspace.x_min},
                    {"x_max", scene.workspace.x_max},
                    {"y_min", scene.workspace.y_min},
                    {"y_max", scene.workspace.y_max}};
  auto& objs = j["objects"] = nlohmann::json::array();
  for (const auto& o : scene.objects) {
    objs.push_back({{"id", o.id},
                    {"class", o.label},
                    {"center", {o.center.x(), o.center.y(), o.center.z()}},
                    {"radius", o.radius},
                    {"color", {o.color.r, o.color.g, o.color.b}},
                    {"hardness", o.hardness}});
  }
  return j;
}

Scene scene_from_json(const nlohmann::json& j) {
  Scene s;
  s.seed = j.at("seed").get<std::uint64_t>();
  const auto& w = j.at("workspace");
  s.workspace = {w.at("x_min").get<double>(), w.at("x_max").get<double>(), w.at("y_min").get<double>(),
                 w.at("y_max").get<double>()};
  for (const auto& o : j.at("objects")) {
    SceneObject obj;
    obj.id = o.at("id").get<int>();
    obj.label = o.at("class").get<std::string>();
    const auto& c = o.at("center");
    obj.center = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
    obj.radius = o.at("radius").get<double>();
    const auto& col = o.at("color");
    obj.color = {col.at(0).get<std::uint8_t>(), col.at(1).get<std::uint8_t>(), col.at(2).get<std::uint8_t>()};
    obj.hardness = o.at("hardness").get<double>();
    s.objects.push_back(std::move(obj));
  }
  validate_scene(s);
  return s;
}

}  // namespace tactex::scene
