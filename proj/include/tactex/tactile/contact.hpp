#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tactex/common/image.hpp"
#include "tactex/tactile/gel.hpp"

namespace tactex::tactile {

struct ContactCriteria {
  double ssim_threshold = 0.96;
  /// Mean marker displacement must exceed this (px); disabled when empty.
  std::optional<double> marker_disp_threshold = 2.0;
  /// Strict "<" instead of "<=" on the SSIM threshold.
  bool strict_ssim = false;

  void validate() const;
};

/// SSIM <= 0.96 and mean marker displacement > 2 px.
ContactCriteria collection_criteria();
/// SSIM < 0.90, no marker criterion.
ContactCriteria pretrain_criteria();

struct ContactScan {
  std::vector<double> ssim;
  std::vector<double> marker_displacement;
};

/// Per-frame SSIM against the reference and mean marker displacement.
ContactScan scan_stream(const std::vector<TactileFrame>& stream, const TactileFrame& reference);

bool satisfies(const ContactCriteria& criteria, double ssim_value, double marker_disp);

/// Smallest index meeting the criteria, or nullopt for "no contact".
std::optional<std::size_t> detect_contact(const std::vector<TactileFrame>& stream, const TactileFrame& reference,
                                          const ContactCriteria& criteria);

inline constexpr int kClipLength = 8;

struct TactileClip {
  std::vector<TactileFrame> frames;
  TactileFrame reference;
  std::optional<double> hardness_label;
  std::size_t contact_index = 0;
  PoseOffset pose;
  std::uint64_t seed = 0;
  std::string object;
  double curvature_radius_mm = 30.0;
};

/// Frames contact_index .. contact_index + 7.
TactileClip capture_clip(const std::vector<TactileFrame>& stream, const TactileFrame& reference,
                         std::size_t contact_index);

/// 1-based clip frame indices used for a T-frame input.
std::vector<int> selected_indices(int T);

/// Signed difference of each selected frame from clip frame 1.
std::vector<GrayImage> select_frames(const TactileClip& clip, int T);

}  // namespace tactex::tactile
