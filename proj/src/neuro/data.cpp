#include "tactex/neuro/data.hpp"

#include "tactex/tactile/ssim.hpp"

namespace tactex::neuro {

GrayImage downsample(const GrayImage& image, int size) {
  if (size <= 0 || image.width() % size != 0 || image.height() % size != 0 || image.width() != image.height()) {
    throw NeuroError("downsample: image size must be a multiple of the target size");
  }
  const int f = image.width() / size;
  GrayImage out(size, size);
  const double inv = 1.0 / (f * f);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      double s = 0.0;
      for (int j = 0; j < f; ++j)
        for (int i = 0; i < f; ++i) s += image.at(x * f + i, y * f + j);
      out.at(x, y) = s * inv;
    }
  return out;
}

PreparedClip prepare_clip(const tactile::TactileClip& clip, int frames, int input_size) {
  if (clip.frames.size() != tactile::kClipLength) throw NeuroError("prepare_clip: clip must hold 8 frames");
  PreparedClip out;
  out.frames.push_back(downsample(tactile::to_gray(clip.frames[0].image), input_size));
  for (int idx : tactile::selected_indices(frames)) {
    out.frames.push_back(downsample(tactile::to_gray(clip.frames[static_cast<std::size_t>(idx - 1)].image), input_size));
  }
  out.label = clip.hardness_label.value_or(0.0);
  out.object = clip.object;
  return out;
}

std::vector<PreparedClip> prepare_clips(const std::vector<tactile::TactileClip>& clips, int frames, int input_size) {
  std::vector<PreparedClip> out;
  out.reserve(clips.size());
  for (const auto& c : clips) out.push_back(prepare_clip(c, frames, input_size));
  return out;
}

Sequence to_sequence(const PreparedClip& clip, const std::optional<AugmentParams>& aug) {
  std::vector<GrayImage> frames;
  frames.reserve(clip.frames.size());
  for (const auto& f : clip.frames) frames.push_back(aug ? augment(f, *aug) : f);
  Sequence seq;
  for (std::size_t k = 1; k < frames.size(); ++k) {
    GrayImage d = frames[k];
    for (std::size_t i = 0; i < d.data().size(); ++i) d.data()[i] -= frames[0].data()[i];
    seq.push_back(std::move(d));
  }
  return seq;
}

}  // namespace tactex::neuro
