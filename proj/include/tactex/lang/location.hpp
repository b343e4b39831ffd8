#pragma once

#include <string>

#include "tactex/scene/scene.hpp"

namespace tactex::lang {

struct LocationPhrase {
  std::string phrase;
  /// Position was outside the workspace and got clamped to its edge.
  bool clamped = false;
};

/// Thirds per axis: small y is front, small x is left. A point on a band
/// boundary belongs to the lower band. "center-center" reads "center".
LocationPhrase describe_location(double x_mm, double y_mm, const scene::Workspace& workspace);

}  // namespace tactex::lang
