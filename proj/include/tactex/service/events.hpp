#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace tactex::service {

struct EventEnvelope {
  std::string session;
  /// Starts at 1, strictly increasing per session.
  std::uint64_t seq = 0;
  /// stage-started, stage-finished, object-result, explanation, run-started,
  /// run-finished, scene-changed.
  std::string kind;
  nlohmann::json payload;

  bool operator==(const EventEnvelope&) const = default;
};

nlohmann::json to_json(const EventEnvelope& e);
EventEnvelope event_from_json(const nlohmann::json& j);

/// Server-sent-event framing: id, event and one data line.
std::string to_sse(const EventEnvelope& e);

/// Append-only event log of one session, optionally mirrored to a JSON-lines
/// file. Readers may wait for new events while a writer appends.
class EventLog {
 public:
  explicit EventLog(std::string session, std::optional<std::filesystem::path> file = std::nullopt);

  /// Loads a previously written file; the log continues after its last event.
  static std::unique_ptr<EventLog> open(std::string session, const std::filesystem::path& file);

  EventEnvelope append(std::string kind, nlohmann::json payload);
  std::vector<EventEnvelope> since(std::uint64_t after_seq) const;
  std::uint64_t last_seq() const;

  /// Blocks until an event newer than `after_seq` exists or the timeout expires.
  bool wait_for(std::uint64_t after_seq, std::chrono::milliseconds timeout) const;

  const std::string& session() const { return session_; }

 private:
  std::string session_;
  std::optional<std::filesystem::path> file_;
  mutable std::shared_mutex mutex_;
  mutable std::mutex wait_mutex_;
  mutable std::condition_variable_any cv_;
  std::vector<EventEnvelope> events_;
};

}  // namespace tactex::service
