#include "tactex/lang/location.hpp"

#include <algorithm>
#include <stdexcept>

namespace tactex::lang {
namespace {

// Band index 0..2; 3 * offset <= extent keeps exact thirds in the lower band without rounding.
int band(double offset, double extent) {
  if (3.0 * offset <= extent) return 0;
  if (3.0 * offset <= 2.0 * extent) return 1;
  return 2;
}

}  // namespace

LocationPhrase describe_location(double x_mm, double y_mm, const scene::Workspace& ws) {
  const double w = ws.x_max - ws.x_min;
  const double d = ws.y_max - ws.y_min;
  if (!(w > 0.0) || !(d > 0.0)) throw std::invalid_argument("describe_location: empty workspace");
  LocationPhrase out;
  const double x = std::clamp(x_mm, ws.x_min, ws.x_max);
  const double y = std::clamp(y_mm, ws.y_min, ws.y_max);
  out.clamped = x != x_mm || y != y_mm;

  static const char* const kDepth[] = {"front", "center", "back"};
  static const char* const kSide[] = {"left", "center", "right"};
  const int by = band(y - ws.y_min, d);
  const int bx = band(x - ws.x_min, w);
  out.phrase = (by == 1 && bx == 1) ? "center" : std::string(kDepth[by]) + "-" + kSide[bx];
  return out;
}

}  // namespace tactex::lang
