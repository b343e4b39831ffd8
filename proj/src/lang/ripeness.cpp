#include "tactex/lang/ripeness.hpp"

#include <cmath>
#include <stdexcept>

namespace tactex::lang {

std::string to_string(Ripeness r) {
  switch (r) {
    case Ripeness::ripe: return "ripe";
    case Ripeness::unripe: return "unripe";
    case Ripeness::not_applicable: return "not-applicable";
  }
  return "?";
}

void RipenessRules::validate() const {
  for (const auto& [fruit, t] : ripe_at_or_below) {
    if (!(t >= 0.0 && t <= 100.0))
      throw std::invalid_argument("ripeness threshold for " + fruit + " outside [0, 100]");
  }
}

Ripeness interpret_ripeness(const std::string& fruit, double hardness, const RipenessRules& rules) {
  if (!(hardness >= 0.0 && hardness <= 100.0))
    throw std::invalid_argument("interpret_ripeness: hardness outside [0, 100]");
  const auto it = rules.ripe_at_or_below.find(fruit);
  if (it == rules.ripe_at_or_below.end()) return Ripeness::not_applicable;
  return hardness <= it->second ? Ripeness::ripe : Ripeness::unripe;
}

nlohmann::json to_json(const RipenessRules& rules) { return rules.ripe_at_or_below; }

RipenessRules ripeness_rules_from_json(const nlohmann::json& j) {
  RipenessRules r;
  r.ripe_at_or_below = j.get<std::map<std::string, double>>();
  r.validate();
  return r;
}

}  // namespace tactex::lang
