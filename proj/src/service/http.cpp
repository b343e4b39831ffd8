#include "tactex/service/http.hpp"

#include <atomic>
#include <thread>

// after Eigen: <resolv.h> defines a _res macro
#include <httplib.h>

namespace tactex::service {
namespace {

constexpr auto kPoll = std::chrono::milliseconds(250);
// comment frames let a stalled stream notice a gone client
constexpr int kKeepAlivePolls = 4;

void send(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send(res, {status, {{"error", message}}});
}

std::optional<std::string> header(const httplib::Request& req, const char* name) {
  if (!req.has_header(name)) return std::nullopt;
  return req.get_header_value(name);
}

std::string session_param(const httplib::Request& req, const nlohmann::json& body = nullptr) {
  if (body.is_object() && body.contains("session") && body["session"].is_string()) return body["session"];
  return req.has_param("session") ? req.get_param_value("session") : "default";
}

// Empty bodies read as {}; anything else must be a JSON object.
std::optional<nlohmann::json> parse_body(const httplib::Request& req, httplib::Response& res) {
  if (req.body.empty()) return nlohmann::json::object();
  try {
    auto j = nlohmann::json::parse(req.body);
    if (j.is_object()) return j;
    send_error(res, 400, "body must be a JSON object");
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, std::string("malformed JSON: ") + e.what());
  }
  return std::nullopt;
}

std::optional<std::uint64_t> parse_seq(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 19) return std::nullopt;
  return std::stoull(s);
}

}  // namespace

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> stopping{false};

  explicit Impl(Service& s) : service(s) { routes(); }

  void routes() {
    server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) { send(res, service.health()); });

    server.Get("/v1/scene", [this](const httplib::Request& req, httplib::Response& res) {
      const bool image = !req.has_param("image") || req.get_param_value("image") != "0";
      send(res, service.scene(session_param(req), image));
    });

    server.Post("/v1/scene/randomize", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req, res);
      if (!body) return;
      try {
        std::optional<std::uint64_t> seed;
        std::optional<int> n;
        if (body->contains("seed") && !(*body)["seed"].is_null()) seed = (*body)["seed"].get<std::uint64_t>();
        if (body->contains("n") && !(*body)["n"].is_null()) n = (*body)["n"].get<int>();
        send(res, service.randomize(session_param(req, *body), seed, n, header(req, "Idempotency-Key")));
      } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, e.what());
      }
    });

    server.Post("/v1/query", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req, res);
      if (!body) return;
      if (!body->contains("text") || !(*body)["text"].is_string()) return send_error(res, 400, "text is required");
      send(res, service.submit_query(session_param(req, *body), (*body)["text"], header(req, "Idempotency-Key")));
    });

    server.Get(R"(/v1/runs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, service.run(req.matches[1]));
    });

    server.Get("/v1/events", [this](const httplib::Request& req, httplib::Response& res) { events(req, res); });
  }

  void events(const httplib::Request& req, httplib::Response& res) {
    const auto session = session_param(req);
    if (!valid_session_id(session)) return send_error(res, 400, "malformed session id");
    std::uint64_t after = 0;
    for (const auto& raw : {req.get_header_value("Last-Event-ID"), req.get_param_value("after")}) {
      if (raw.empty()) continue;
      const auto v = parse_seq(raw);
      if (!v) return send_error(res, 400, "bad event id " + raw);
      after = *v;
    }
    const bool follow = !req.has_param("follow") || req.get_param_value("follow") != "0";
    EventLog& log = service.events(session);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [this, &log, after, follow, idle = 0](std::size_t, httplib::DataSink& sink) mutable {
          for (const auto& e : log.since(after)) {
            const auto frame = to_sse(e);
            if (!sink.write(frame.data(), frame.size())) return false;
            after = e.seq;
            idle = 0;
          }
          if (!follow || stopping) {
            sink.done();
            return true;
          }
          if (!log.wait_for(after, kPoll) && ++idle >= kKeepAlivePolls) {
            idle = 0;
            static const std::string ping = ": keep-alive\n\n";
            if (!sink.write(ping.data(), ping.size())) return false;
          }
          return true;
        });
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) return -1;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

void HttpServer::stop() {
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace tactex::service
