#include "tactex/neuro/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "tactex/common/rng.hpp"

namespace tactex::neuro {
namespace {

void rgb_saturation_hue(GrayImage& img, double saturation, double hue) {
  // Luma-preserving saturation scale, then hue rotation about the grey axis.
  const double angle = hue * 2.0 * M_PI;
  const double c = std::cos(angle), s = std::sin(angle);
  const double k = 1.0 / 3.0, r = std::sqrt(k);
  const std::array<double, 9> rot{c + (1 - c) * k,     (1 - c) * k - r * s, (1 - c) * k + r * s,
                                  (1 - c) * k + r * s, c + (1 - c) * k,     (1 - c) * k - r * s,
                                  (1 - c) * k - r * s, (1 - c) * k + r * s, c + (1 - c) * k};
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      double px[3];
      const double grey = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
      for (int ch = 0; ch < 3; ++ch) px[ch] = grey + (img.at(x, y, ch) - grey) * saturation;
      for (int ch = 0; ch < 3; ++ch)
        img.at(x, y, ch) = rot[ch * 3] * px[0] + rot[ch * 3 + 1] * px[1] + rot[ch * 3 + 2] * px[2];
    }
}

}  // namespace

AugmentParams sample_augment(std::uint64_t seed) {
  Rng rng(seed);
  AugmentParams p;
  p.flip = uniform(rng, 0.0, 1.0) < 0.5;
  p.brightness = uniform(rng, 0.9, 1.1);
  p.contrast = uniform(rng, 0.9, 1.1);
  p.saturation = uniform(rng, 0.9, 1.1);
  p.hue = uniform(rng, -0.01, 0.01);
  return p;
}

GrayImage augment(const GrayImage& image, const AugmentParams& params) {
  GrayImage out = image;
  const int w = image.width(), ch = image.channels();
  if (params.flip) {
    for (int y = 0; y < image.height(); ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < ch; ++c) out.at(x, y, c) = image.at(w - 1 - x, y, c);
  }
  auto d = out.data();
  for (double& v : d) v = std::clamp(v * params.brightness, 0.0, 255.0);
  if (params.contrast != 1.0 && !d.empty()) {
    double m = 0.0;
    for (double v : d) m += v;
    m /= static_cast<double>(d.size());
    for (double& v : d) v = std::clamp((v - m) * params.contrast + m, 0.0, 255.0);
  }
  if (ch == 3 && (params.saturation != 1.0 || params.hue != 0.0)) {
    rgb_saturation_hue(out, params.saturation, params.hue);
    for (double& v : d) v = std::clamp(v, 0.0, 255.0);
  }
  return out;
}

GrayImage augment(const GrayImage& image, std::uint64_t seed) { return augment(image, sample_augment(seed)); }

}  // namespace tactex::neuro
