#include "tactex/service/events.hpp"

#include <fstream>
#include <stdexcept>

namespace tactex::service {

nlohmann::json to_json(const EventEnvelope& e) {
  return {{"session", e.session}, {"seq", e.seq}, {"kind", e.kind}, {"payload", e.payload}};
}

EventEnvelope event_from_json(const nlohmann::json& j) {
  return {j.at("session").get<std::string>(), j.at("seq").get<std::uint64_t>(), j.at("kind").get<std::string>(),
          j.at("payload")};
}

std::string to_sse(const EventEnvelope& e) {
  return "id: " + std::to_string(e.seq) + "\nevent: " + e.kind + "\ndata: " + to_json(e).dump() + "\n\n";
}

EventLog::EventLog(std::string session, std::optional<std::filesystem::path> file)
    : session_(std::move(session)), file_(std::move(file)) {
  if (file_) std::filesystem::create_directories(file_->parent_path());
}

std::unique_ptr<EventLog> EventLog::open(std::string session, const std::filesystem::path& file) {
  auto log = std::make_unique<EventLog>(session, file);
  std::ifstream in(file);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto e = event_from_json(nlohmann::json::parse(line));
    if (e.session != log->session_) throw std::runtime_error("event log " + file.string() + " mixes sessions");
    if (e.seq != log->events_.size() + 1) throw std::runtime_error("event log " + file.string() + " has a gap");
    log->events_.push_back(std::move(e));
  }
  return log;
}

EventEnvelope EventLog::append(std::string kind, nlohmann::json payload) {
  EventEnvelope added;
  {
    std::unique_lock lock(mutex_);
    EventEnvelope e{session_, events_.size() + 1, std::move(kind), std::move(payload)};
    if (file_) {
      std::ofstream out(*file_, std::ios::app);
      out << to_json(e).dump() << '\n';
      if (!out) throw std::runtime_error("cannot append to " + file_->string());
    }
    events_.push_back(std::move(e));
    added = events_.back();
  }
  {
    std::lock_guard wl(wait_mutex_);
  }
  cv_.notify_all();
  return added;
}

std::vector<EventEnvelope> EventLog::since(std::uint64_t after_seq) const {
  std::shared_lock lock(mutex_);
  if (after_seq >= events_.size()) return {};
  return {events_.begin() + static_cast<std::ptrdiff_t>(after_seq), events_.end()};
}

std::uint64_t EventLog::last_seq() const {
  std::shared_lock lock(mutex_);
  return events_.size();
}

bool EventLog::wait_for(std::uint64_t after_seq, std::chrono::milliseconds timeout) const {
  std::unique_lock wl(wait_mutex_);
  return cv_.wait_for(wl, timeout, [&] { return last_seq() > after_seq; });
}

}  // namespace tactex::service
