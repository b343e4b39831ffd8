#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace tactex::lang {

enum class Property { hardness, softness, ripeness };
enum class Mode { identify, superlative, summarize };
enum class Extreme { most, least };

std::string to_string(Property p);
std::string to_string(Mode m);
std::string to_string(Extreme e);

struct Intent {
  /// Fruit classes in order of mention; empty means all fruits in the scene.
  std::vector<std::string> targets;
  Property property = Property::hardness;
  Mode mode = Mode::identify;
  Extreme extreme = Extreme::most;
  /// True iff a fruit noun appears in the text.
  bool explicit_targets = false;

  bool all_fruits() const { return targets.empty(); }
  /// Superlatives pick the largest hardness when true, the smallest otherwise.
  bool prefers_hard() const;
  void validate() const;
  bool operator==(const Intent&) const = default;
};

/// Surface noun form -> fruit class.
class Lexicon {
 public:
  Lexicon() = default;
  /// Registers each class with its singular and regular plural forms.
  explicit Lexicon(const std::vector<std::string>& classes);

  void add_form(const std::string& form, const std::string& cls);
  std::optional<std::string> lookup(const std::string& word) const;
  std::vector<std::string> classes() const;

 private:
  std::map<std::string, std::string> forms_;
};

/// The ten scene fruit classes.
const Lexicon& default_lexicon();

struct ParseResult {
  std::optional<Intent> intent;
  /// Original text, kept verbatim for unparseable queries.
  std::string raw;
  std::string error;

  bool ok() const { return intent.has_value(); }
};

/// Keyword grammar over a closed lexicon. Never throws.
ParseResult parse_query(const std::string& text, const Lexicon& lexicon = default_lexicon());

nlohmann::json to_json(const Intent& intent);
Intent intent_from_json(const nlohmann::json& j);

}  // namespace tactex::lang
