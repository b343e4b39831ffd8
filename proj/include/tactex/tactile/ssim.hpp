#pragma once

#include "tactex/common/image.hpp"

namespace tactex::tactile {

/// Mean SSIM over all fully contained 11x11 Gaussian windows (sigma 1.5),
/// C1 = (0.01*255)^2, C2 = (0.03*255)^2. Single-channel images only.
double ssim(const GrayImage& a, const GrayImage& b);
double ssim(const Gray8& a, const Gray8& b);

GrayImage to_gray(const Gray8& image);

}  // namespace tactex::tactile
