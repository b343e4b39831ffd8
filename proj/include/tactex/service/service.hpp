#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tactex/neuro/model.hpp"
#include "tactex/pipeline/run.hpp"
#include "tactex/scene/scene.hpp"
#include "tactex/service/events.hpp"

namespace tactex::service {

struct ServiceConfig {
  /// Sessions, event logs and run records live here; in memory only when empty.
  std::optional<std::filesystem::path> data_dir;
  pipeline::PipelineConfig pipeline;
  std::string checkpoint_id = "untrained";
  std::uint64_t seed = 0;
  /// Object count of a session's first scene; random when empty.
  std::optional<int> initial_objects;
};

/// Everything a session's event log determines.
struct SessionState {
  std::string id;
  scene::Scene scene;
  std::string checkpoint_id;
  std::string detector_profile;
  std::vector<std::string> run_ids;
  /// Idempotency key -> response body of the request that used it.
  std::map<std::string, nlohmann::json> idempotent;

  bool operator==(const SessionState&) const = default;
};

/// Rebuilds a session from its events alone.
SessionState replay_session(const std::string& id, const std::vector<EventEnvelope>& events);

/// The chat view a client derives from a session's events: one turn per run
/// with its stage timeline, explanation and result cards. Cards of a run are
/// shown only once its explanation has arrived. Events are applied in
/// sequence order whatever order they are passed in.
nlohmann::json session_view(std::vector<EventEnvelope> events);

struct Response {
  int status = 200;
  nlohmann::json body;
};

/// Session ids are 1-64 characters of [A-Za-z0-9_-].
bool valid_session_id(const std::string& id);

/// Transport-free core of the HTTP API. Queries run on worker threads, one at
/// a time per session.
class Service {
 public:
  Service(ServiceConfig config, neuro::HardnessModel model);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Response scene(const std::string& session, bool with_image);
  Response randomize(const std::string& session, std::optional<std::uint64_t> seed, std::optional<int> n,
                     const std::optional<std::string>& idempotency_key);
  Response submit_query(const std::string& session, const std::string& text,
                        const std::optional<std::string>& idempotency_key);
  Response run(const std::string& run_id) const;
  Response health() const;

  /// Throws std::invalid_argument for a malformed session id.
  EventLog& events(const std::string& session);
  SessionState state(const std::string& session);
  bool busy(const std::string& session);
  /// Blocks until the session has no query in flight.
  void wait_idle(const std::string& session);

 private:
  struct Session {
    std::unique_ptr<EventLog> log;
    SessionState state;
    bool busy = false;
  };

  Session& session_locked(const std::string& id);
  void execute(const std::string& session, const std::string& run_id, const std::string& text, std::uint64_t seed);
  std::optional<std::filesystem::path> run_path(const std::string& run_id) const;

  ServiceConfig config_;
  neuro::HardnessModel model_;
  mutable std::mutex mutex_;
  std::condition_variable idle_cv_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, nlohmann::json> runs_;
  std::vector<std::thread> workers_;
};

}  // namespace tactex::service
