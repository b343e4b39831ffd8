#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tactex/tactile/contact.hpp"
#include "tactex/tactile/gel.hpp"

namespace tactex::tactile {

/// One pressed sample before contact gating.
struct ClipSpec {
  std::string object;
  double hardness = 0.0;
  double curvature_radius_mm = 30.0;
  PoseOffset pose;
  std::uint64_t seed = 0;
};

/// Presses, gates and cuts a clip; empty when contact is never detected or
/// fewer than 8 frames follow it.
std::optional<TactileClip> make_clip(const ClipSpec& spec, const GelConfig& gel, const ContactCriteria& criteria,
                                     double max_depth_mm);

/// Uniform pose jitter: +-5 mm in x and y, yaw 0..45 deg.
PoseOffset random_pose(std::uint64_t seed);

struct ProtocolObject {
  std::string name;
  double hardness;
  double curvature_radius_mm;
};

/// The seven collection objects: five cubes, an elastic band and a pouch.
std::vector<ProtocolObject> finetune_objects();

struct GenerationStats {
  std::size_t requested = 0;
  std::size_t rejected = 0;
};

inline constexpr double kDefaultMaxDepthMm = 5.0;
inline constexpr int kFinetunePoses = 40;

/// Wide-range corpus: hardness U(20, 95), curvature U(8, 80) mm, SSIM < 0.90 gate.
std::vector<TactileClip> generate_pretrain_set(std::size_t n, std::uint64_t seed, const GelConfig& gel = {},
                                               GenerationStats* stats = nullptr);

/// 7 objects x `poses` under the collection gate.
std::vector<TactileClip> generate_finetune_set(std::uint64_t seed, int poses = kFinetunePoses,
                                               const GelConfig& gel = {}, GenerationStats* stats = nullptr);

/// Fruit presses with hardness U(lo, hi) and class-typical curvature.
std::vector<TactileClip> generate_fruit_set(std::size_t n, std::uint64_t seed, double hardness_lo = 60.0,
                                            double hardness_hi = 90.0, const GelConfig& gel = {},
                                            GenerationStats* stats = nullptr);

/// Collection-gated clips of one fruit at a given true hardness per sample.
std::vector<TactileClip> generate_clips_for(const std::string& object, const std::vector<double>& hardness,
                                            double curvature_radius_mm, std::uint64_t seed, const GelConfig& gel = {});

/// Directory per sample: frame_1..8.png, reference.png, meta.json.
void save_clip(const TactileClip& clip, const std::filesystem::path& dir);
TactileClip load_clip(const std::filesystem::path& dir);

/// Writes clips under root/<prefix>_NNNNN and a manifest.jsonl listing them.
void save_dataset(const std::vector<TactileClip>& clips, const std::filesystem::path& root,
                  const std::string& prefix);
std::vector<TactileClip> load_dataset(const std::filesystem::path& root);

}  // namespace tactex::tactile
