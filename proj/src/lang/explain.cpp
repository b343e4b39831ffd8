#include "tactex/lang/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>

#include "tactex/lang/location.hpp"

namespace tactex::lang {
namespace {

std::string format_ha(double h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", h);
  return buf;
}

std::string location_of(const ObjectReport& o, const scene::Workspace& ws) {
  return describe_location(o.x_mm, o.y_mm, ws).phrase;
}

std::string superlative_word(const Intent& in) {
  const bool most = in.extreme == Extreme::most;
  switch (in.property) {
    case Property::hardness: return most ? "hardest" : "least hard";
    case Property::softness: return most ? "softest" : "least soft";
    case Property::ripeness: return most ? "ripest" : "least ripe";
  }
  return "";
}

std::string ranking_span(const Intent& in) {
  if (in.property == Property::ripeness) return in.prefers_hard() ? "least ripe to ripest" : "ripest to least ripe";
  return in.prefers_hard() ? "hardest to softest" : "softest to hardest";
}

std::string object_sentence(const ObjectReport& o, const ExplanationInput& in) {
  std::string s = "The " + o.label + " at the " + location_of(o, in.workspace) + " has a hardness of " +
                  format_ha(o.hardness) + " HA";
  switch (interpret_ripeness(o.label, std::clamp(o.hardness, 0.0, 100.0), in.ripeness)) {
    case Ripeness::ripe: s += " and is ripe"; break;
    case Ripeness::unripe: s += " and is not yet ripe"; break;
    case Ripeness::not_applicable: break;
  }
  return s + ".";
}

}  // namespace

void ExplanationInput::validate() const {
  intent.validate();
  ripeness.validate();
  std::set<std::string> measured;
  for (const auto& o : objects) {
    if (!std::isfinite(o.hardness)) throw std::invalid_argument("explanation: non-finite hardness for " + o.label);
    if (!intent.all_fruits() &&
        std::find(intent.targets.begin(), intent.targets.end(), o.label) == intent.targets.end())
      throw std::invalid_argument("explanation: object " + o.label + " is not a target");
    measured.insert(o.label);
  }
  std::set<std::string> missing;
  for (const auto* list : {&not_found, &not_measured}) {
    for (const auto& m : *list) {
      if (measured.count(m) || !missing.insert(m).second)
        throw std::invalid_argument("explanation: " + m + " reported twice");
    }
  }
  for (const auto& t : intent.targets) {
    if (!measured.count(t) && !missing.count(t))
      throw std::invalid_argument("explanation: target " + t + " neither measured nor reported missing");
  }
}

std::vector<std::size_t> ranking_order(const ExplanationInput& input) {
  std::vector<std::size_t> idx(input.objects.size());
  std::iota(idx.begin(), idx.end(), 0);
  const bool hard_first = input.intent.prefers_hard();
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& oa = input.objects[a];
    const auto& ob = input.objects[b];
    if (oa.hardness != ob.hardness) return hard_first ? oa.hardness > ob.hardness : oa.hardness < ob.hardness;
    if (oa.label != ob.label) return oa.label < ob.label;
    return location_of(oa, input.workspace) < location_of(ob, input.workspace);
  });
  return idx;
}

std::optional<std::size_t> ranking_choice(const ExplanationInput& input) {
  const std::size_t n = input.objects.size();
  const Mode m = input.intent.mode;
  if (m == Mode::identify || n == 0 || (m == Mode::summarize && n < 2)) return std::nullopt;
  return ranking_order(input).front();
}

std::string compose_template(const ExplanationInput& input) {
  input.validate();
  std::vector<std::string> sentences;
  for (const auto& o : input.objects) sentences.push_back(object_sentence(o, input));

  if (const auto choice = ranking_choice(input)) {
    const auto& in = input.intent;
    if (in.mode == Mode::superlative) {
      const auto& o = input.objects[*choice];
      const auto loc = location_of(o, input.workspace);
      if (in.all_fruits()) {
        sentences.push_back("The " + superlative_word(in) + " fruit is the " + o.label + " at the " + loc + ".");
      } else {
        sentences.push_back("The " + superlative_word(in) + " " + o.label + " is the one at the " + loc + ".");
      }
    } else {
      std::string s = "From " + ranking_span(in) + ": ";
      const auto order = ranking_order(input);
      for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& o = input.objects[order[k]];
        if (k) s += ", ";
        s += o.label + " (" + location_of(o, input.workspace) + ")";
      }
      sentences.push_back(s + ".");
    }
  }

  for (const auto& nf : input.not_found) sentences.push_back("No " + nf + " was found in the scene.");
  for (const auto& nm : input.not_measured) sentences.push_back("The " + nm + " could not be measured.");
  if (input.intent.all_fruits() && input.objects.empty() && input.not_measured.empty())
    sentences.push_back("No fruit was found in the scene.");

  std::string text;
  for (const auto& s : sentences) {
    if (!text.empty()) text += ' ';
    text += s;
  }
  return text;
}

nlohmann::json to_json(const ExplanationInput& input) {
  nlohmann::json objs = nlohmann::json::array();
  for (const auto& o : input.objects) {
    objs.push_back({{"label", o.label},
                    {"position_mm", {o.x_mm, o.y_mm}},
                    {"location", location_of(o, input.workspace)},
                    {"hardness", o.hardness}});
  }
  return {{"objects", objs},
          {"not_found", input.not_found},
          {"not_measured", input.not_measured},
          {"intent", to_json(input.intent)},
          {"workspace", {input.workspace.x_min, input.workspace.x_max, input.workspace.y_min, input.workspace.y_max}},
          {"ripeness_thresholds", to_json(input.ripeness)}};
}

ExplanationInput explanation_input_from_json(const nlohmann::json& j) {
  ExplanationInput in;
  for (const auto& o : j.at("objects")) {
    const auto p = o.at("position_mm").get<std::vector<double>>();
    if (p.size() != 2) throw std::invalid_argument("explanation: position_mm needs two values");
    in.objects.push_back({o.at("label").get<std::string>(), p[0], p[1], o.at("hardness").get<double>()});
  }
  in.not_found = j.at("not_found").get<std::vector<std::string>>();
  in.not_measured = j.value("not_measured", std::vector<std::string>{});
  in.intent = intent_from_json(j.at("intent"));
  if (j.contains("workspace")) {
    const auto w = j.at("workspace").get<std::vector<double>>();
    if (w.size() != 4) throw std::invalid_argument("explanation: workspace needs four values");
    in.workspace = {w[0], w[1], w[2], w[3]};
  }
  if (j.contains("ripeness_thresholds")) in.ripeness = ripeness_rules_from_json(j.at("ripeness_thresholds"));
  in.validate();
  return in;
}

}  // namespace tactex::lang
