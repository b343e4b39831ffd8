#pragma once

#include <optional>
#include <string>

#include "tactex/lang/config.hpp"
#include "tactex/lang/explain.hpp"
#include "tactex/lang/judge.hpp"

namespace tactex::lang {

enum class Backend { template_engine, external };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

struct Explanation {
  std::string text;
  Backend used = Backend::template_engine;
  /// External backend was requested but the template answered instead.
  bool degraded = false;
  std::string error;
};

/// Wire request for the external explainer.
nlohmann::json explain_request(const ExplanationInput& input, const LangConfig& cfg);

/// Posts the request and returns the reply text; nullopt plus `error` on any failure.
std::optional<std::string> call_external_explainer(const ExplanationInput& input, const LangConfig& cfg,
                                                   std::string* error = nullptr);

/// Template text, or the external reply verbatim with template fallback.
Explanation compose_explanation(const ExplanationInput& input, Backend backend, const LangConfig& cfg);

/// External judge; nullopt when unreachable or the reply is malformed.
std::optional<JudgeScore> call_external_judge(const std::string& explanation, const ExplanationInput& truth,
                                              const LangConfig& cfg, std::string* error = nullptr);

}  // namespace tactex::lang
