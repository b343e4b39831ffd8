#include "tactex/lang/intent.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

#include "tactex/scene/scene.hpp"

namespace tactex::lang {
namespace {

struct PropertyWord {
  Property property;
  bool superlative;
};

const std::map<std::string, PropertyWord>& property_words() {
  static const std::map<std::string, PropertyWord> words{
      {"hard", {Property::hardness, false}},     {"harder", {Property::hardness, false}},
      {"hardest", {Property::hardness, true}},   {"hardness", {Property::hardness, false}},
      {"firm", {Property::hardness, false}},     {"firmer", {Property::hardness, false}},
      {"firmest", {Property::hardness, true}},   {"firmness", {Property::hardness, false}},
      {"soft", {Property::softness, false}},     {"softer", {Property::softness, false}},
      {"softest", {Property::softness, true}},   {"softness", {Property::softness, false}},
      {"ripe", {Property::ripeness, false}},     {"riper", {Property::ripeness, false}},
      {"ripest", {Property::ripeness, true}},    {"ripeness", {Property::ripeness, false}},
      {"ripened", {Property::ripeness, false}},  {"unripe", {Property::ripeness, false}},
  };
  return words;
}

const std::set<std::string> kUniversal{"all", "every", "everything", "each"};
const std::set<std::string> kSummarize{"summarize", "summarise", "summary", "overview", "list", "compare", "rank"};

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalpha(c) && c < 128) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '\'') {
      continue;
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

std::string to_string(Property p) {
  switch (p) {
    case Property::hardness: return "hardness";
    case Property::softness: return "softness";
    case Property::ripeness: return "ripeness";
  }
  return "?";
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::identify: return "identify";
    case Mode::superlative: return "superlative";
    case Mode::summarize: return "summarize";
  }
  return "?";
}

std::string to_string(Extreme e) { return e == Extreme::most ? "most" : "least"; }

bool Intent::prefers_hard() const { return (property == Property::hardness) == (extreme == Extreme::most); }

void Intent::validate() const {
  if (mode == Mode::superlative && targets.size() > 1)
    throw std::invalid_argument("intent: superlative takes at most one target class");
  std::set<std::string> seen(targets.begin(), targets.end());
  if (seen.size() != targets.size()) throw std::invalid_argument("intent: duplicate target class");
  if (explicit_targets == targets.empty()) throw std::invalid_argument("intent: explicit flag disagrees with targets");
}

Lexicon::Lexicon(const std::vector<std::string>& classes) {
  for (const auto& c : classes) {
    add_form(c, c);
    add_form(c + "s", c);
    add_form(c + "es", c);
  }
}

void Lexicon::add_form(const std::string& form, const std::string& cls) { forms_[form] = cls; }

std::optional<std::string> Lexicon::lookup(const std::string& word) const {
  const auto it = forms_.find(word);
  if (it == forms_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Lexicon::classes() const {
  std::set<std::string> s;
  for (const auto& [form, cls] : forms_) s.insert(cls);
  return {s.begin(), s.end()};
}

const Lexicon& default_lexicon() {
  static const Lexicon lex(scene::fruit_lexicon());
  return lex;
}

ParseResult parse_query(const std::string& text, const Lexicon& lexicon) {
  ParseResult result;
  result.raw = text;
  const auto tokens = tokenize(text);
  if (tokens.empty()) {
    result.error = "unparseable: no words";
    return result;
  }

  Intent intent;
  std::optional<Property> property;
  bool superlative = false;
  bool universal = false;
  bool summarize = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& w = tokens[i];
    if (const auto cls = lexicon.lookup(w)) {
      if (std::find(intent.targets.begin(), intent.targets.end(), *cls) == intent.targets.end())
        intent.targets.push_back(*cls);
      continue;
    }
    if (const auto it = property_words().find(w); it != property_words().end()) {
      // first property word wins: "the softest of the hard ones" asks about softness
      if (!property) property = it->second.property;
      superlative = superlative || it->second.superlative;
      continue;
    }
    if (w == "most" || w == "least") {
      superlative = true;
      if (w == "least") intent.extreme = Extreme::least;
    } else if (kUniversal.count(w)) {
      universal = true;
    } else if (kSummarize.count(w)) {
      summarize = true;
    }
  }

  if (!property && intent.targets.empty()) {
    result.error = "unparseable: no fruit or property word";
    return result;
  }
  intent.property = property.value_or(Property::hardness);
  intent.explicit_targets = !intent.targets.empty();
  if (superlative && intent.targets.size() <= 1) {
    intent.mode = Mode::superlative;
  } else if (superlative || summarize || universal || intent.targets.empty()) {
    intent.mode = Mode::summarize;
  } else {
    intent.mode = Mode::identify;
  }
  result.intent = intent;
  return result;
}

nlohmann::json to_json(const Intent& intent) {
  return {{"targets", intent.all_fruits() ? nlohmann::json("all-fruits") : nlohmann::json(intent.targets)},
          {"property", to_string(intent.property)},
          {"mode", to_string(intent.mode)},
          {"extreme", to_string(intent.extreme)},
          {"explicit", intent.explicit_targets}};
}

Intent intent_from_json(const nlohmann::json& j) {
  Intent in;
  if (j.at("targets").is_array()) in.targets = j.at("targets").get<std::vector<std::string>>();
  const auto prop = j.at("property").get<std::string>();
  if (prop == "hardness") in.property = Property::hardness;
  else if (prop == "softness") in.property = Property::softness;
  else if (prop == "ripeness") in.property = Property::ripeness;
  else throw std::invalid_argument("intent: unknown property " + prop);
  const auto mode = j.at("mode").get<std::string>();
  if (mode == "identify") in.mode = Mode::identify;
  else if (mode == "superlative") in.mode = Mode::superlative;
  else if (mode == "summarize") in.mode = Mode::summarize;
  else throw std::invalid_argument("intent: unknown mode " + mode);
  in.extreme = j.value("extreme", "most") == "least" ? Extreme::least : Extreme::most;
  in.explicit_targets = j.at("explicit").get<bool>();
  in.validate();
  return in;
}

}  // namespace tactex::lang
