#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tactex/neuro/augment.hpp"
#include "tactex/neuro/model.hpp"
#include "tactex/tactile/contact.hpp"

namespace tactex::neuro {

/// Clip frame 1 followed by the T selected frames, average-pooled to the model input size.
struct PreparedClip {
  std::vector<GrayImage> frames;
  double label = 0.0;
  std::string object;
};

PreparedClip prepare_clip(const tactile::TactileClip& clip, int frames, int input_size);
std::vector<PreparedClip> prepare_clips(const std::vector<tactile::TactileClip>& clips, int frames, int input_size);

/// Signed differences of the selected frames from frame 1, after an optional augmentation
/// applied identically to every frame of the clip.
Sequence to_sequence(const PreparedClip& clip, const std::optional<AugmentParams>& aug = std::nullopt);

/// Block-average downsampling by an integer factor.
GrayImage downsample(const GrayImage& image, int size);

}  // namespace tactex::neuro
