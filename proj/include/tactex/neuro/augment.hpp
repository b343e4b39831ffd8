#pragma once

#include <cstdint>

#include "tactex/common/image.hpp"

namespace tactex::neuro {

struct AugmentParams {
  bool flip = false;
  double brightness = 1.0;
  double contrast = 1.0;
  double saturation = 1.0;
  /// Fraction of the full hue circle.
  double hue = 0.0;
};

/// Horizontal flip with p = 0.5, brightness/contrast/saturation in [0.9, 1.1], hue in [-0.01, 0.01].
AugmentParams sample_augment(std::uint64_t seed);

/// Flip, then brightness (x * b), then contrast about the image mean, clamped to [0, 255].
/// Saturation and hue act on colour only and leave single-channel images unchanged.
GrayImage augment(const GrayImage& image, const AugmentParams& params);
GrayImage augment(const GrayImage& image, std::uint64_t seed);

}  // namespace tactex::neuro
