#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tactex/lang/intent.hpp"
#include "tactex/lang/ripeness.hpp"

namespace tactex::lang {

struct ClientConfig {
  /// Empty host disables the external client. A bearer token is taken from
  /// TACTEX_LLM_API_KEY when set.
  std::string host;
  int port = 80;
  std::string path = "/v1/explain";
  std::string judge_path = "/v1/judge";
  double timeout_s = 10.0;
  double temperature = 0.1;
};

struct LangConfig {
  std::vector<std::string> fruit_classes;
  /// Extra surface forms beyond the regular plurals, form -> class.
  std::map<std::string, std::string> extra_forms;
  RipenessRules ripeness;
  /// Prompt list handed to an open-vocabulary detector for all-fruit queries.
  std::vector<std::string> open_vocabulary;
  std::string role;
  std::vector<std::string> rules;
  std::string judge_instruction;
  ClientConfig client;

  Lexicon lexicon() const;
  void validate() const;
};

LangConfig default_lang_config();

/// Missing keys keep their defaults.
LangConfig lang_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LangConfig& cfg);
LangConfig load_lang_config(const std::filesystem::path& path);

}  // namespace tactex::lang
