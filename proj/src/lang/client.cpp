#include "tactex/lang/client.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include <httplib.h>

namespace tactex::lang {
namespace {

std::optional<nlohmann::json> post_json(const ClientConfig& cc, const std::string& path, const nlohmann::json& body,
                                        std::string* error) {
  auto fail = [&](const std::string& msg) -> std::optional<nlohmann::json> {
    if (error) *error = msg;
    return std::nullopt;
  };
  if (cc.host.empty()) return fail("external client not configured");
  httplib::Client cli(cc.host, cc.port);
  const auto sec = static_cast<time_t>(cc.timeout_s);
  const auto usec = static_cast<time_t>((cc.timeout_s - static_cast<double>(sec)) * 1e6);
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);
  if (const char* key = std::getenv("TACTEX_LLM_API_KEY"); key && *key) cli.set_bearer_token_auth(key);
  const auto res = cli.Post(path, body.dump(), "application/json");
  if (!res) return fail("request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) return fail("HTTP " + std::to_string(res->status));
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    return fail(std::string("malformed reply: ") + e.what());
  }
}

}  // namespace

std::string to_string(Backend b) { return b == Backend::external ? "external" : "template"; }

Backend backend_from_string(const std::string& s) {
  if (s == "template") return Backend::template_engine;
  if (s == "external") return Backend::external;
  throw std::invalid_argument("unknown explanation backend " + s);
}

nlohmann::json explain_request(const ExplanationInput& input, const LangConfig& cfg) {
  const auto data = to_json(input);
  return {{"role_string", cfg.role},
          {"rules", cfg.rules},
          {"objects", data.at("objects")},
          {"not_found", data.at("not_found")},
          {"not_measured", data.at("not_measured")},
          {"ripeness_thresholds", data.at("ripeness_thresholds")},
          {"intent", data.at("intent")},
          {"temperature", cfg.client.temperature}};
}

std::optional<std::string> call_external_explainer(const ExplanationInput& input, const LangConfig& cfg,
                                                   std::string* error) {
  const auto reply = post_json(cfg.client, cfg.client.path, explain_request(input, cfg), error);
  if (!reply) return std::nullopt;
  if (!reply->is_object() || !reply->contains("text") || !reply->at("text").is_string()) {
    if (error) *error = "reply has no text field";
    return std::nullopt;
  }
  return reply->at("text").get<std::string>();
}

Explanation compose_explanation(const ExplanationInput& input, Backend backend, const LangConfig& cfg) {
  Explanation out;
  if (backend == Backend::external) {
    if (auto text = call_external_explainer(input, cfg, &out.error)) {
      out.text = std::move(*text);
      out.used = Backend::external;
      return out;
    }
    out.degraded = true;
  }
  out.text = compose_template(input);
  out.used = Backend::template_engine;
  return out;
}

std::optional<JudgeScore> call_external_judge(const std::string& explanation, const ExplanationInput& truth,
                                              const LangConfig& cfg, std::string* error) {
  const nlohmann::json body{{"instruction", cfg.judge_instruction},
                            {"response", explanation},
                            {"ground_truth", to_json(truth)},
                            {"temperature", cfg.client.temperature}};
  const auto reply = post_json(cfg.client, cfg.client.judge_path, body, error);
  if (!reply) return std::nullopt;
  try {
    JudgeScore s{reply->at("accuracy").get<int>(), reply->at("completeness").get<int>(),
                 reply->at("clarity").get<int>()};
    s.validate();
    return s;
  } catch (const std::exception& e) {
    if (error) *error = std::string("malformed judge reply: ") + e.what();
    return std::nullopt;
  }
}

}  // namespace tactex::lang
