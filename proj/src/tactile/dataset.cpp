#include "tactex/tactile/dataset.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "tactex/common/png_io.hpp"
#include "tactex/common/rng.hpp"
#include "tactex/scene/scene.hpp"

namespace tactex::tactile {
namespace {

constexpr int kMaxRejectsPerSample = 20;

template <typename SpecFn>
std::vector<TactileClip> generate(std::size_t n, std::uint64_t seed, const GelConfig& gel,
                                  const ContactCriteria& criteria, GenerationStats* stats, SpecFn&& make_spec) {
  std::vector<TactileClip> out;
  out.reserve(n);
  GenerationStats local{n, 0};
  for (std::size_t i = 0; i < n; ++i) {
    bool done = false;
    for (int attempt = 0; attempt < kMaxRejectsPerSample && !done; ++attempt) {
      const std::uint64_t s = derive_seed(seed, (static_cast<std::uint64_t>(i) << 8) | static_cast<std::uint64_t>(attempt));
      auto clip = make_clip(make_spec(i, s), gel, criteria, kDefaultMaxDepthMm);
      if (clip) {
        out.push_back(std::move(*clip));
        done = true;
      } else {
        ++local.rejected;
      }
    }
    if (!done) throw std::runtime_error("dataset generation: no contact after repeated presses");
  }
  if (stats) *stats = local;
  return out;
}

nlohmann::json frame_meta(const TactileFrame& f) {
  nlohmann::json markers = nlohmann::json::array();
  for (const auto& m : f.markers) markers.push_back({m.x(), m.y()});
  return {{"indentation_depth", f.indentation_depth}, {"markers", markers}};
}

TactileFrame frame_from(const std::filesystem::path& png, const nlohmann::json& meta) {
  TactileFrame f;
  f.image = png::read8(png);
  f.indentation_depth = meta.at("indentation_depth").get<double>();
  for (const auto& m : meta.at("markers")) f.markers.emplace_back(m.at(0).get<double>(), m.at(1).get<double>());
  return f;
}

}  // namespace

std::optional<TactileClip> make_clip(const ClipSpec& spec, const GelConfig& gel, const ContactCriteria& criteria,
                                     double max_depth_mm) {
  const auto stream = press(spec.hardness, spec.pose, gel, max_depth_mm, spec.seed, spec.curvature_radius_mm);
  const auto idx = detect_contact(stream.frames, stream.reference, criteria);
  if (!idx || *idx + kClipLength > stream.frames.size()) return std::nullopt;
  TactileClip clip = capture_clip(stream.frames, stream.reference, *idx);
  clip.hardness_label = spec.hardness;
  clip.pose = spec.pose;
  clip.seed = spec.seed;
  clip.object = spec.object;
  clip.curvature_radius_mm = spec.curvature_radius_mm;
  return clip;
}

PoseOffset random_pose(std::uint64_t seed) {
  Rng rng(seed);
  PoseOffset p;
  p.dx_mm = uniform(rng, -5.0, 5.0);
  p.dy_mm = uniform(rng, -5.0, 5.0);
  p.yaw_deg = uniform(rng, 0.0, 45.0);
  return p;
}

std::vector<ProtocolObject> finetune_objects() {
  return {{"pouch", 62.0, 45.0},  {"cube-66", 66.0, 70.0},   {"cube-69.5", 69.5, 70.0}, {"cube-73", 73.0, 70.0},
          {"cube-76.5", 76.5, 70.0}, {"cube-80", 80.0, 70.0}, {"band", 88.0, 12.0}};
}

std::vector<TactileClip> generate_pretrain_set(std::size_t n, std::uint64_t seed, const GelConfig& gel,
                                               GenerationStats* stats) {
  return generate(n, seed, gel, pretrain_criteria(), stats, [](std::size_t, std::uint64_t s) {
    Rng rng(derive_seed(s, 1));
    ClipSpec spec;
    spec.object = "online";
    spec.hardness = uniform(rng, 20.0, 95.0);
    spec.curvature_radius_mm = uniform(rng, 8.0, 80.0);
    spec.pose = random_pose(derive_seed(s, 2));
    spec.seed = s;
    return spec;
  });
}

std::vector<TactileClip> generate_finetune_set(std::uint64_t seed, int poses, const GelConfig& gel,
                                               GenerationStats* stats) {
  const auto objects = finetune_objects();
  const std::size_t n = objects.size() * static_cast<std::size_t>(poses);
  return generate(n, seed, gel, collection_criteria(), stats, [&](std::size_t i, std::uint64_t s) {
    const auto& obj = objects[i / static_cast<std::size_t>(poses)];
    ClipSpec spec;
    spec.object = obj.name;
    spec.hardness = obj.hardness;
    spec.curvature_radius_mm = obj.curvature_radius_mm;
    spec.pose = random_pose(derive_seed(s, 2));
    spec.seed = s;
    return spec;
  });
}

std::vector<TactileClip> generate_fruit_set(std::size_t n, std::uint64_t seed, double hardness_lo, double hardness_hi,
                                            const GelConfig& gel, GenerationStats* stats) {
  const auto lexicon = scene::fruit_lexicon();
  const auto& priors = scene::default_class_priors();
  return generate(n, seed, gel, collection_criteria(), stats, [&](std::size_t i, std::uint64_t s) {
    Rng rng(derive_seed(s, 1));
    ClipSpec spec;
    spec.object = lexicon[i % lexicon.size()];
    spec.hardness = uniform(rng, hardness_lo, hardness_hi);
    spec.curvature_radius_mm = priors.at(spec.object).radius_mm * uniform(rng, 0.9, 1.1);
    spec.pose = random_pose(derive_seed(s, 2));
    spec.seed = s;
    return spec;
  });
}

std::vector<TactileClip> generate_clips_for(const std::string& object, const std::vector<double>& hardness,
                                            double curvature_radius_mm, std::uint64_t seed, const GelConfig& gel) {
  return generate(hardness.size(), seed, gel, collection_criteria(), nullptr, [&](std::size_t i, std::uint64_t s) {
    ClipSpec spec;
    spec.object = object;
    spec.hardness = hardness[i];
    spec.curvature_radius_mm = curvature_radius_mm;
    spec.pose = random_pose(derive_seed(s, 2));
    spec.seed = s;
    return spec;
  });
}

void save_clip(const TactileClip& clip, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta;
  meta["object"] = clip.object;
  meta["hardness"] = clip.hardness_label ? nlohmann::json(*clip.hardness_label) : nlohmann::json(nullptr);
  meta["pose"] = {{"dx_mm", clip.pose.dx_mm}, {"dy_mm", clip.pose.dy_mm}, {"yaw_deg", clip.pose.yaw_deg}};
  meta["seed"] = clip.seed;
  meta["contact_index"] = clip.contact_index;
  meta["curvature_radius_mm"] = clip.curvature_radius_mm;
  meta["reference"] = frame_meta(clip.reference);
  png::write8(dir / "reference.png", clip.reference.image);
  auto& frames = meta["frames"] = nlohmann::json::array();
  for (std::size_t i = 0; i < clip.frames.size(); ++i) {
    png::write8(dir / ("frame_" + std::to_string(i + 1) + ".png"), clip.frames[i].image);
    frames.push_back(frame_meta(clip.frames[i]));
  }
  std::ofstream(dir / "meta.json") << meta.dump(1) << '\n';
}

TactileClip load_clip(const std::filesystem::path& dir) {
  std::ifstream in(dir / "meta.json");
  if (!in) throw std::runtime_error("load_clip: missing meta.json in " + dir.string());
  const auto meta = nlohmann::json::parse(in);
  TactileClip clip;
  clip.object = meta.at("object").get<std::string>();
  if (!meta.at("hardness").is_null()) clip.hardness_label = meta.at("hardness").get<double>();
  const auto& p = meta.at("pose");
  clip.pose = {p.at("dx_mm").get<double>(), p.at("dy_mm").get<double>(), p.at("yaw_deg").get<double>()};
  clip.seed = meta.at("seed").get<std::uint64_t>();
  clip.contact_index = meta.at("contact_index").get<std::size_t>();
  clip.curvature_radius_mm = meta.at("curvature_radius_mm").get<double>();
  clip.reference = frame_from(dir / "reference.png", meta.at("reference"));
  const auto& frames = meta.at("frames");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    clip.frames.push_back(frame_from(dir / ("frame_" + std::to_string(i + 1) + ".png"), frames[i]));
  }
  if (clip.frames.size() != kClipLength) throw std::runtime_error("load_clip: clip must have 8 frames");
  return clip;
}

void save_dataset(const std::vector<TactileClip>& clips, const std::filesystem::path& root, const std::string& prefix) {
  std::filesystem::create_directories(root);
  std::ofstream manifest(root / "manifest.jsonl");
  for (std::size_t i = 0; i < clips.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%05zu", prefix.c_str(), i);
    save_clip(clips[i], root / name);
    nlohmann::json line{{"path", name},
                        {"object", clips[i].object},
                        {"hardness", clips[i].hardness_label ? nlohmann::json(*clips[i].hardness_label) : nlohmann::json()},
                        {"seed", clips[i].seed},
                        {"contact_index", clips[i].contact_index}};
    manifest << line.dump() << '\n';
  }
}

std::vector<TactileClip> load_dataset(const std::filesystem::path& root) {
  std::ifstream manifest(root / "manifest.jsonl");
  if (!manifest) throw std::runtime_error("load_dataset: missing manifest.jsonl in " + root.string());
  std::vector<TactileClip> clips;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    clips.push_back(load_clip(root / nlohmann::json::parse(line).at("path").get<std::string>()));
  }
  return clips;
}

}  // namespace tactex::tactile
