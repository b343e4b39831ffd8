#pragma once

#include <json.hpp>

#include "tactex/common/image.hpp"

namespace tactex::vision {

struct CannyParams {
  double low = 50.0;
  double high = 150.0;
};

/// Canny edge map of a binary mask scaled to 0/255: Sobel gradient (L2),
/// non-maximum suppression, hysteresis with 8-connectivity. Suppression keeps
/// ties, so both pixels straddling a step edge are marked.
Mask canny_edges(const Mask& mask, const CannyParams& params = {});

/// Binary dilation with a 3x3 square structuring element.
Mask dilate3x3(const Mask& mask, int iterations = 1);

struct RefinedMask {
  Mask mask;
  /// True when refinement would have emptied the mask and the input was kept.
  bool fallback = false;
};

/// Removes the twice-dilated Canny edge band from the mask.
RefinedMask refine_mask(const Mask& mask, const CannyParams& params = {});

/// |A and B| / |A or B|; throws when both masks are empty or sizes differ.
double iou(const Mask& a, const Mask& b);

/// Euclidean distance from each pixel to the nearest pixel where `mask` is
/// set (0 on set pixels).
GrayImage distance_to_set(const Mask& mask);

/// Run-length encoding, row-major, starting with a run of zeros.
nlohmann::json mask_to_rle(const Mask& mask);
Mask mask_from_rle(const nlohmann::json& j);

struct PixelCentroid {
  double u = 0.0;
  double v = 0.0;
};
PixelCentroid mask_centroid(const Mask& mask);

}  // namespace tactex::vision
