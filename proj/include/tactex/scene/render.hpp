#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tactex/common/image.hpp"
#include "tactex/scene/camera.hpp"
#include "tactex/scene/scene.hpp"

namespace tactex::scene {

struct RgbdFrame {
  Rgb8 color;
  /// Z-depth in mm.
  GrayImage depth;
  int index = 0;
};

inline constexpr Rgb kTableColor{156, 142, 120};
inline constexpr int kBackgroundLabel = -1;

/// Object id hit by each pixel's ray, kBackgroundLabel for the table.
Image<int> label_map(const Scene& scene, const CameraIntrinsics& k, const CameraPose& pose = {});

/// Exact pinhole ray-casting of the spheres over a flat table, then i.i.d.
/// Gaussian depth noise (clamped at 0). sigma == 0 gives exact geometry.
RgbdFrame render(const Scene& scene, const CameraIntrinsics& k, double depth_noise_sigma,
                 std::uint64_t noise_seed = 0, int index = 0, const CameraPose& pose = {});

/// Adds noise to a clean frame; cheaper than re-rendering for frame sequences.
RgbdFrame with_depth_noise(const RgbdFrame& clean, double sigma, std::uint64_t noise_seed, int index);

/// `count` consecutive frames of a static scene with independent depth noise.
std::vector<RgbdFrame> render_sequence(const Scene& scene, const CameraIntrinsics& k, double sigma,
                                       std::uint64_t seed, int count, const CameraPose& pose = {});

Mask ground_truth_mask(const Scene& scene, int object_id, const CameraIntrinsics& k, const CameraPose& pose = {});

/// Millimetre depth rounded to 16 bits.
Image<std::uint16_t> depth_to_u16(const GrayImage& depth);

/// Writes <stem>_color.png and <stem>_depth.png.
void export_frame(const RgbdFrame& frame, const std::filesystem::path& dir, const std::string& stem);

}  // namespace tactex::scene
