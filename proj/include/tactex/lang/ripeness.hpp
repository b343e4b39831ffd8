#pragma once

#include <map>
#include <string>

#include <json.hpp>

namespace tactex::lang {

enum class Ripeness { ripe, unripe, not_applicable };

std::string to_string(Ripeness r);

struct RipenessRules {
  /// fruit -> hardness (HA) at or below which it counts as ripe
  std::map<std::string, double> ripe_at_or_below{{"banana", 65.0}, {"lemon", 64.0}, {"lime", 64.0}};

  void validate() const;
  bool applies_to(const std::string& fruit) const { return ripe_at_or_below.count(fruit) > 0; }
};

Ripeness interpret_ripeness(const std::string& fruit, double hardness, const RipenessRules& rules = {});

nlohmann::json to_json(const RipenessRules& rules);
RipenessRules ripeness_rules_from_json(const nlohmann::json& j);

}  // namespace tactex::lang
