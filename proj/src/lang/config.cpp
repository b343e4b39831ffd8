#include "tactex/lang/config.hpp"

#include <fstream>
#include <stdexcept>

#include "tactex/scene/scene.hpp"

namespace tactex::lang {

Lexicon LangConfig::lexicon() const {
  Lexicon lex(fruit_classes);
  for (const auto& [form, cls] : extra_forms) lex.add_form(form, cls);
  return lex;
}

void LangConfig::validate() const {
  if (fruit_classes.empty()) throw std::invalid_argument("lang config: empty fruit lexicon");
  ripeness.validate();
  if (!(client.timeout_s > 0.0)) throw std::invalid_argument("lang config: client timeout must be positive");
  if (client.temperature < 0.0) throw std::invalid_argument("lang config: negative temperature");
}

LangConfig default_lang_config() {
  LangConfig c;
  c.fruit_classes = scene::fruit_lexicon();
  c.open_vocabulary = {"apple",  "avocado",    "banana", "kiwi",   "lemon",    "lime",     "mango",
                       "orange", "pear",       "tomato", "grape",  "peach",    "plum",     "strawberry",
                       "carrot", "cucumber",   "potato", "onion",  "broccoli", "bell pepper"};
  c.role = "You turn object data into scene descriptions, explain and interpret tactile levels.";
  c.rules = {
      "Describe where each object is using left/center/right and front/center/back.",
      "Use the ripeness thresholds to say whether bananas, limes and lemons are ripe; do not rate other fruits.",
      "Be concise: one sentence per object and report hardness in HA with one decimal.",
      "If a requested fruit was not found, say so explicitly.",
      "For superlative questions name the single object that answers the question.",
  };
  c.judge_instruction =
      "Score the response from 1 to 5 on accuracy, completeness, and clarity given the object data. "
      "Reply with JSON {\"accuracy\":n,\"completeness\":n,\"clarity\":n}.";
  return c;
}

LangConfig lang_config_from_json(const nlohmann::json& j) {
  LangConfig c = default_lang_config();
  if (j.contains("fruit_classes")) c.fruit_classes = j.at("fruit_classes").get<std::vector<std::string>>();
  if (j.contains("extra_forms")) c.extra_forms = j.at("extra_forms").get<std::map<std::string, std::string>>();
  if (j.contains("ripeness_thresholds")) c.ripeness = ripeness_rules_from_json(j.at("ripeness_thresholds"));
  if (j.contains("open_vocabulary")) c.open_vocabulary = j.at("open_vocabulary").get<std::vector<std::string>>();
  if (j.contains("role")) c.role = j.at("role").get<std::string>();
  if (j.contains("rules")) c.rules = j.at("rules").get<std::vector<std::string>>();
  if (j.contains("judge_instruction")) c.judge_instruction = j.at("judge_instruction").get<std::string>();
  if (j.contains("client")) {
    const auto& k = j.at("client");
    c.client.host = k.value("host", c.client.host);
    c.client.port = k.value("port", c.client.port);
    c.client.path = k.value("path", c.client.path);
    c.client.judge_path = k.value("judge_path", c.client.judge_path);
    c.client.timeout_s = k.value("timeout_s", c.client.timeout_s);
    c.client.temperature = k.value("temperature", c.client.temperature);
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const LangConfig& c) {
  return {{"fruit_classes", c.fruit_classes},
          {"extra_forms", c.extra_forms},
          {"ripeness_thresholds", to_json(c.ripeness)},
          {"open_vocabulary", c.open_vocabulary},
          {"role", c.role},
          {"rules", c.rules},
          {"judge_instruction", c.judge_instruction},
          {"client",
           {{"host", c.client.host},
            {"port", c.client.port},
            {"path", c.client.path},
            {"judge_path", c.client.judge_path},
            {"timeout_s", c.client.timeout_s},
            {"temperature", c.client.temperature}}}};
}

LangConfig load_lang_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lang config " + path.string());
  return lang_config_from_json(nlohmann::json::parse(in));
}

}  // namespace tactex::lang
