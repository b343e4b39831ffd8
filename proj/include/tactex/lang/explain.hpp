#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tactex/lang/intent.hpp"
#include "tactex/lang/ripeness.hpp"
#include "tactex/scene/scene.hpp"

namespace tactex::lang {

struct ObjectReport {
  std::string label;
  double x_mm = 0.0;
  double y_mm = 0.0;
  double hardness = 0.0;

  bool operator==(const ObjectReport&) const = default;
};

struct ExplanationInput {
  std::vector<ObjectReport> objects;
  std::vector<std::string> not_found;
  /// Targets that were seen but yielded no measurement.
  std::vector<std::string> not_measured;
  Intent intent;
  scene::Workspace workspace;
  RipenessRules ripeness;

  /// Throws std::invalid_argument unless every target is measured or listed as missing.
  void validate() const;
};

/// Objects in ranking order for the intent: hardest first when the intent
/// prefers hard, softest first otherwise. Ties by label, then location
/// phrase, then input order.
std::vector<std::size_t> ranking_order(const ExplanationInput& input);

/// The object a ranking sentence names, or nullopt when no ranking sentence is due.
std::optional<std::size_t> ranking_choice(const ExplanationInput& input);

/// Deterministic template text.
std::string compose_template(const ExplanationInput& input);

nlohmann::json to_json(const ExplanationInput& input);
ExplanationInput explanation_input_from_json(const nlohmann::json& j);

}  // namespace tactex::lang
