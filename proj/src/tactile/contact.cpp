#include "tactex/tactile/contact.hpp"

#include <stdexcept>

#include "tactex/tactile/ssim.hpp"

namespace tactex::tactile {

void ContactCriteria::validate() const {
  if (!(ssim_threshold > 0.0 && ssim_threshold <= 1.0)) {
    throw std::invalid_argument("contact criteria: ssim threshold must lie in (0, 1]");
  }
}

ContactCriteria collection_criteria() { return {0.96, 2.0, false}; }
ContactCriteria pretrain_criteria() { return {0.90, std::nullopt, true}; }

ContactScan scan_stream(const std::vector<TactileFrame>& stream, const TactileFrame& reference) {
  ContactScan scan;
  const GrayImage ref = to_gray(reference.image);
  for (const auto& f : stream) {
    scan.ssim.push_back(ssim(to_gray(f.image), ref));
    scan.marker_displacement.push_back(mean_marker_displacement(f, reference));
  }
  return scan;
}

bool satisfies(const ContactCriteria& c, double ssim_value, double marker_disp) {
  const bool ssim_ok = c.strict_ssim ? ssim_value < c.ssim_threshold : ssim_value <= c.ssim_threshold;
  const bool marker_ok = !c.marker_disp_threshold || marker_disp > *c.marker_disp_threshold;
  return ssim_ok && marker_ok;
}

std::optional<std::size_t> detect_contact(const std::vector<TactileFrame>& stream, const TactileFrame& reference,
                                          const ContactCriteria& criteria) {
  criteria.validate();
  if (stream.empty()) throw std::invalid_argument("detect_contact: empty stream");
  const GrayImage ref = to_gray(reference.image);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const double disp = mean_marker_displacement(stream[i], reference);
    // the marker test is cheap; skip SSIM when it already fails
    if (criteria.marker_disp_threshold && !(disp > *criteria.marker_disp_threshold)) continue;
    if (satisfies(criteria, ssim(to_gray(stream[i].image), ref), disp)) return i;
  }
  return std::nullopt;
}

TactileClip capture_clip(const std::vector<TactileFrame>& stream, const TactileFrame& reference,
                         std::size_t contact_index) {
  if (contact_index + kClipLength > stream.size()) {
    throw std::invalid_argument("capture_clip: fewer than 8 frames after contact");
  }
  TactileClip clip;
  clip.frames.assign(stream.begin() + static_cast<std::ptrdiff_t>(contact_index),
                     stream.begin() + static_cast<std::ptrdiff_t>(contact_index + kClipLength));
  clip.reference = reference;
  clip.contact_index = contact_index;
  return clip;
}

std::vector<int> selected_indices(int T) {
  if (T == 2) return {2, 8};
  if (T == 4) return {2, 4, 6, 8};
  throw std::invalid_argument("select_frames: T must be 2 or 4");
}

std::vector<GrayImage> select_frames(const TactileClip& clip, int T) {
  const auto idx = selected_indices(T);
  if (clip.frames.size() != kClipLength) throw std::invalid_argument("select_frames: clip must have 8 frames");
  const GrayImage first = to_gray(clip.frames.front().image);
  std::vector<GrayImage> out;
  for (int i : idx) {
    GrayImage d = to_gray(clip.frames[static_cast<std::size_t>(i - 1)].image);
    auto dv = d.data();
    auto fv = first.data();
    for (std::size_t p = 0; p < dv.size(); ++p) dv[p] -= fv[p];
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace tactex::tactile
