#include "tactex/service/service.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <regex>
#include <stdexcept>

#include "tactex/common/png_io.hpp"
#include "tactex/common/rng.hpp"
#include "tactex/lang/location.hpp"
#include "tactex/lang/ripeness.hpp"
#include "tactex/scene/render.hpp"

// after Eigen: <resolv.h> defines a _res macro
#include <httplib.h>

namespace tactex::service {
namespace {

std::uint64_t name_stream(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

void apply_event(SessionState& s, const EventEnvelope& e) {
  const auto& p = e.payload;
  auto remember = [&] {
    if (p.contains("idempotency_key") && p.at("idempotency_key").is_string())
      s.idempotent[p.at("idempotency_key").get<std::string>()] = p.at("response");
  };
  if (e.kind == "session-opened") {
    s.checkpoint_id = p.at("checkpoint_id").get<std::string>();
    s.detector_profile = p.at("detector_profile").get<std::string>();
  } else if (e.kind == "scene-changed") {
    s.scene = scene::scene_from_json(p.at("scene"));
    remember();
  } else if (e.kind == "run-started") {
    s.run_ids.push_back(p.at("run_id").get<std::string>());
    remember();
  }
}

std::string run_id_for(const std::string& session, std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", n);
  return session + "-" + buf;
}

Response error(int status, const std::string& message) { return {status, {{"error", message}}}; }

}  // namespace

SessionState replay_session(const std::string& id, const std::vector<EventEnvelope>& events) {
  SessionState s;
  s.id = id;
  for (const auto& e : events) apply_event(s, e);
  return s;
}

nlohmann::json session_view(std::vector<EventEnvelope> events) {
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.seq < b.seq; });
  nlohmann::json turns = nlohmann::json::array();
  std::map<std::string, std::size_t> index;
  std::map<std::string, nlohmann::json> pending_cards;
  nlohmann::json scene_seed = nullptr;
  std::uint64_t last = 0;
  for (const auto& e : events) {
    if (e.seq <= last) continue;  // duplicates from an overlapping replay
    last = e.seq;
    const auto& p = e.payload;
    if (e.kind == "scene-changed") {
      scene_seed = p.at("seed");
      continue;
    }
    if (!p.contains("run_id")) continue;
    const auto run_id = p.at("run_id").get<std::string>();
    if (e.kind == "run-started") {
      index[run_id] = turns.size();
      turns.push_back({{"run_id", run_id},
                       {"query", p.at("query")},
                       {"stages", nlohmann::json::array()},
                       {"explanation", nullptr},
                       {"cards", nlohmann::json::array()},
                       {"status", "running"}});
      continue;
    }
    const auto it = index.find(run_id);
    if (it == index.end()) continue;
    auto& turn = turns[it->second];
    if (e.kind == "stage-started") {
      turn["stages"].push_back({{"stage", p.at("stage")}, {"status", "running"}});
    } else if (e.kind == "stage-finished") {
      for (auto& st : turn["stages"])
        if (st["stage"] == p.at("stage")) st = {{"stage", p.at("stage")}, {"status", "done"}, {"ms", p.at("duration_ms")}};
    } else if (e.kind == "object-result") {
      auto card = p;
      card.erase("run_id");
      if (turn["explanation"].is_null()) {
        pending_cards[run_id].push_back(card);
      } else {
        turn["cards"].push_back(card);
      }
    } else if (e.kind == "explanation") {
      turn["explanation"] = p.at("text");
      turn["degraded"] = p.value("degraded", false);
      for (auto& c : pending_cards[run_id]) turn["cards"].push_back(c);
      pending_cards.erase(run_id);
    } else if (e.kind == "run-finished") {
      turn["status"] = p.at("status");
      turn["scenario_success"] = p.value("scenario_success", false);
    }
  }
  return {{"scene_seed", scene_seed}, {"turns", turns}, {"last_seq", last}};
}

bool valid_session_id(const std::string& id) {
  static const std::regex re("[A-Za-z0-9_-]{1,64}");
  return std::regex_match(id, re);
}

Service::Service(ServiceConfig config, neuro::HardnessModel model)
    : config_(std::move(config)), model_(std::move(model)) {
  if (config_.data_dir) std::filesystem::create_directories(*config_.data_dir / "runs");
}

Service::~Service() {
  for (auto& w : workers_)
    if (w.joinable()) w.join();
}

Service::Session& Service::session_locked(const std::string& id) {
  if (!valid_session_id(id)) throw std::invalid_argument("malformed session id");
  auto it = sessions_.find(id);
  if (it != sessions_.end()) return it->second;

  Session s;
  std::optional<std::filesystem::path> file;
  if (config_.data_dir) file = *config_.data_dir / "sessions" / id / "events.jsonl";
  if (file && std::filesystem::exists(*file)) {
    s.log = EventLog::open(id, *file);
  } else {
    s.log = std::make_unique<EventLog>(id, file);
    s.log->append("session-opened",
                  {{"checkpoint_id", config_.checkpoint_id}, {"detector_profile", config_.pipeline.detector.name}});
    const auto seed = derive_seed(config_.seed, name_stream(id));
    s.log->append("scene-changed",
                  {{"seed", seed}, {"scene", scene::to_json(scene::generate_scene(seed, config_.initial_objects))}});
  }
  s.state = replay_session(id, s.log->since(0));
  return sessions_.emplace(id, std::move(s)).first->second;
}

EventLog& Service::events(const std::string& session) {
  std::lock_guard lock(mutex_);
  return *session_locked(session).log;
}

SessionState Service::state(const std::string& session) {
  std::lock_guard lock(mutex_);
  return session_locked(session).state;
}

bool Service::busy(const std::string& session) {
  std::lock_guard lock(mutex_);
  return session_locked(session).busy;
}

void Service::wait_idle(const std::string& session) {
  std::unique_lock lock(mutex_);
  auto& s = session_locked(session);
  idle_cv_.wait(lock, [&] { return !s.busy; });
}

Response Service::scene(const std::string& session, bool with_image) {
  scene::Scene sc;
  try {
    std::lock_guard lock(mutex_);
    sc = session_locked(session).state.scene;
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  }
  nlohmann::json body{{"session", session}, {"scene", scene::to_json(sc)}};
  if (with_image) {
    const auto frame = scene::render(sc, config_.pipeline.intrinsics, 0.0, 0, 0, config_.pipeline.pose);
    const auto png = png::encode8(frame.color);
    body["image_png_base64"] = httplib::detail::base64_encode(std::string(png.begin(), png.end()));
  }
  return {200, body};
}

Response Service::randomize(const std::string& session, std::optional<std::uint64_t> seed, std::optional<int> n,
                            const std::optional<std::string>& key) {
  if (n && (*n < 1 || *n > 6)) return error(400, "n must be 1..6");
  std::lock_guard lock(mutex_);
  Session* s = nullptr;
  try {
    s = &session_locked(session);
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  }
  // keys are scoped per endpoint
  const auto scoped = key ? std::optional<std::string>("randomize:" + *key) : std::nullopt;
  if (scoped) {
    const auto it = s->state.idempotent.find(*scoped);
    if (it != s->state.idempotent.end()) return {200, it->second};
  }
  if (s->busy) return error(409, "a query is running in this session");
  const auto scene_seed = seed.value_or(derive_seed(config_.seed, name_stream(session) + s->log->last_seq()));
  scene::Scene sc;
  try {
    sc = scene::generate_scene(scene_seed, n);
  } catch (const std::exception& e) {
    return error(400, e.what());
  }
  nlohmann::json response{{"session", session}, {"seed", scene_seed}, {"scene", scene::to_json(sc)}};
  nlohmann::json payload{{"seed", scene_seed}, {"scene", response["scene"]}};
  if (scoped) {
    payload["idempotency_key"] = *scoped;
    payload["response"] = response;
  }
  apply_event(s->state, s->log->append("scene-changed", payload));
  return {200, response};
}

Response Service::submit_query(const std::string& session, const std::string& text,
                               const std::optional<std::string>& key) {
  if (text.empty()) return error(400, "text must not be empty");
  std::lock_guard lock(mutex_);
  Session* s = nullptr;
  try {
    s = &session_locked(session);
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  }
  const auto scoped = key ? std::optional<std::string>("query:" + *key) : std::nullopt;
  if (scoped) {
    const auto it = s->state.idempotent.find(*scoped);
    if (it != s->state.idempotent.end()) return {202, it->second};
  }
  if (s->busy) return error(409, "a query is already running in this session");

  const auto n = s->state.run_ids.size() + 1;
  const auto run_id = run_id_for(session, n);
  const auto seed = derive_seed(config_.seed, name_stream(run_id));
  nlohmann::json response{{"run_id", run_id}, {"session", session}, {"status", "accepted"}};
  nlohmann::json payload{{"run_id", run_id}, {"query", text}, {"seed", seed}};
  if (scoped) {
    payload["idempotency_key"] = *scoped;
    payload["response"] = response;
  }
  apply_event(s->state, s->log->append("run-started", payload));
  s->busy = true;
  runs_[run_id] = {{"run_id", run_id}, {"session", session}, {"status", "running"}};
  workers_.emplace_back([this, session, run_id, text, seed] { execute(session, run_id, text, seed); });
  return {202, response};
}

void Service::execute(const std::string& session, const std::string& run_id, const std::string& text,
                      std::uint64_t seed) {
  EventLog* log = nullptr;
  scene::Scene sc;
  {
    std::lock_guard lock(mutex_);
    auto& s = sessions_.at(session);
    log = s.log.get();
    sc = s.state.scene;
  }
  nlohmann::json result;
  try {
    auto sink = [&](const nlohmann::json& ev) {
      auto payload = ev;
      payload.erase("type");
      payload["run_id"] = run_id;
      log->append(ev.at("status") == "started" ? "stage-started" : "stage-finished", payload);
    };
    const auto rec = pipeline::run_query(sc, text, model_, config_.pipeline, seed, sink);
    log->append("explanation", {{"run_id", run_id},
                                {"text", rec.explanation},
                                {"degraded", rec.degraded},
                                {"judge", lang::to_json(rec.judge)}});
    for (const auto& o : rec.objects) {
      nlohmann::json card{{"run_id", run_id},
                          {"object_id", o.object_id},
                          {"label", o.label},
                          {"found", o.grounded},
                          {"measured", o.measured},
                          {"succeeded", o.succeeded()},
                          {"failure", o.failure},
                          {"hardness", nullptr},
                          {"ripeness", nullptr},
                          {"location", nullptr}};
      if (o.hardness_estimate) {
        card["hardness"] = *o.hardness_estimate;
        card["ripeness"] = lang::to_string(lang::interpret_ripeness(
            o.label, std::clamp(*o.hardness_estimate, 0.0, 100.0), config_.pipeline.lang.ripeness));
      }
      if (o.position_mm)
        card["location"] = lang::describe_location((*o.position_mm)[0], (*o.position_mm)[1], sc.workspace).phrase;
      log->append("object-result", card);
    }
    result = pipeline::to_json(rec, true);
    result["status"] = "finished";
  } catch (const std::exception& e) {
    result = {{"status", "failed"}, {"errors", {e.what()}}};
  }
  result["run_id"] = run_id;
  result["session"] = session;
  if (const auto path = run_path(run_id)) {
    std::ofstream out(*path);
    out << result.dump(2) << '\n';
  }
  {
    std::lock_guard lock(mutex_);
    runs_[run_id] = result;
  }
  log->append("run-finished", {{"run_id", run_id},
                               {"status", result["status"]},
                               {"scenario_success", result.value("scenario_success", false)},
                               {"object_success_rate", result.value("object_success_rate", 0.0)}});
  {
    std::lock_guard lock(mutex_);
    sessions_.at(session).busy = false;
  }
  idle_cv_.notify_all();
}

std::optional<std::filesystem::path> Service::run_path(const std::string& run_id) const {
  if (!config_.data_dir) return std::nullopt;
  return *config_.data_dir / "runs" / (run_id + ".json");
}

Response Service::run(const std::string& run_id) const {
  {
    std::lock_guard lock(mutex_);
    const auto it = runs_.find(run_id);
    if (it != runs_.end()) return {200, it->second};
    // run ids embed a valid session id, so this rejects path tricks too
    const auto dash = run_id.rfind('-');
    if (dash == std::string::npos || !valid_session_id(run_id)) return error(404, "unknown run " + run_id);
  }
  if (const auto path = run_path(run_id); path && std::filesystem::exists(*path)) {
    std::ifstream in(*path);
    return {200, nlohmann::json::parse(in)};
  }
  return error(404, "unknown run " + run_id);
}

Response Service::health() const {
  std::lock_guard lock(mutex_);
  nlohmann::json busy = nlohmann::json::array();
  for (const auto& [id, s] : sessions_)
    if (s.busy) busy.push_back(id);
  return {200,
          {{"status", "ok"},
           {"checkpoint_id", config_.checkpoint_id},
           {"detector_profile", config_.pipeline.detector.name},
           {"explainer", lang::to_string(config_.pipeline.backend)},
           {"sessions", sessions_.size()},
           {"busy_sessions", busy}}};
}

}  // namespace tactex::service
