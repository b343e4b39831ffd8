#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <set>
#include <sstream>
#include <fstream>
#include <thread>

#include "tactex/service/events.hpp"
#include "tactex/service/http.hpp"
#include "tactex/service/service.hpp"
#include "tactex/vision/detector.hpp"

// after Eigen: <resolv.h> defines a _res macro
#include <httplib.h>

namespace sv = tactex::service;
using tactex::neuro::HardnessModel;
using tactex::neuro::ModelConfig;

namespace {

HardnessModel small_model() {
  ModelConfig c;
  c.input_size = 32;
  c.conv_channels = {4, 8};
  c.lstm_layers = 1;
  c.hidden = 8;
  c.head_hidden = 8;
  return HardnessModel(c, 3);
}

sv::ServiceConfig fast_config(std::optional<std::filesystem::path> dir = std::nullopt) {
  sv::ServiceConfig c;
  c.data_dir = std::move(dir);
  c.pipeline.detector = tactex::vision::perfect_profile();
  c.pipeline.depth_noise_sigma = 0.0;
  c.checkpoint_id = "small";
  c.seed = 21;
  c.initial_objects = 3;
  return c;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

// Minimal SSE parser: returns the envelopes carried by "data:" lines.
std::vector<sv::EventEnvelope> parse_sse(const std::string& text) {
  std::vector<sv::EventEnvelope> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("data: ", 0) == 0) out.push_back(sv::event_from_json(nlohmann::json::parse(line.substr(6))));
  }
  return out;
}

}  // namespace

TEST(EventLog, SequenceStartsAtOneAndIncreases) {
  sv::EventLog log("s");
  EXPECT_EQ(log.last_seq(), 0u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(log.append("k", {{"i", i}}).seq, static_cast<std::uint64_t>(i + 1));
  const auto tail = log.since(3);
  ASSERT_EQ(tail.size(), 2u);
  EXPECT_EQ(tail[0].seq, 4u);
  EXPECT_EQ(tail[1].payload["i"], 4);
  EXPECT_TRUE(log.since(5).empty());
  EXPECT_TRUE(log.since(99).empty());
}

TEST(EventLog, ConcurrentAppendsGetDistinctOrderedSeqs) {
  sv::EventLog log("s");
  std::vector<std::thread> ts;
  for (int t = 0; t < 4; ++t)
    ts.emplace_back([&log, t] {
      for (int i = 0; i < 50; ++i) log.append("k", {{"t", t}});
    });
  for (auto& t : ts) t.join();
  const auto all = log.since(0);
  ASSERT_EQ(all.size(), 200u);
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i].seq, i + 1);
}

TEST(EventLog, WaitForWakesOnAppend) {
  sv::EventLog log("s");
  EXPECT_FALSE(log.wait_for(0, std::chrono::milliseconds(10)));
  std::thread writer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    log.append("k", {});
  });
  EXPECT_TRUE(log.wait_for(0, std::chrono::seconds(5)));
  writer.join();
}

TEST(EventLog, FileRoundTripAndGapDetection) {
  TempDir dir("tactex_eventlog_test");
  const auto file = dir.path / "events.jsonl";
  {
    sv::EventLog log("s", file);
    log.append("a", {{"x", 1}});
    log.append("b", {{"x", 2}});
  }
  auto reopened = sv::EventLog::open("s", file);
  ASSERT_EQ(reopened->last_seq(), 2u);
  EXPECT_EQ(reopened->since(0)[1].kind, "b");
  EXPECT_EQ(reopened->append("c", {}).seq, 3u);
  EXPECT_THROW(sv::EventLog::open("other", file), std::runtime_error);

  std::ofstream(dir.path / "gap.jsonl") << sv::to_json(sv::EventEnvelope{"s", 2, "a", {}}).dump() << "\n";
  EXPECT_THROW(sv::EventLog::open("s", dir.path / "gap.jsonl"), std::runtime_error);
}

TEST(EventLog, SseFraming) {
  const sv::EventEnvelope e{"s", 7, "stage-finished", {{"stage", "parse"}}};
  const auto frame = sv::to_sse(e);
  EXPECT_EQ(frame.rfind("id: 7\nevent: stage-finished\ndata: ", 0), 0u);
  EXPECT_EQ(frame.substr(frame.size() - 2), "\n\n");
  const auto parsed = parse_sse(frame);
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0], e);
}

TEST(Service, QueryIsSingleFlightPerSession) {
  sv::Service svc(fast_config(), small_model());
  const auto first = svc.submit_query("default", "How hard is the apple?", std::nullopt);
  EXPECT_EQ(first.status, 202);
  EXPECT_EQ(first.body["run_id"], "default-0001");
  const auto second = svc.submit_query("default", "How soft is the pear?", std::nullopt);
  EXPECT_EQ(second.status, 409);
  EXPECT_EQ(svc.randomize("default", 3, 2, std::nullopt).status, 409);
  // other sessions are independent
  EXPECT_EQ(svc.submit_query("other", "How hard is the apple?", std::nullopt).status, 202);
  svc.wait_idle("default");
  svc.wait_idle("other");
  EXPECT_EQ(svc.submit_query("default", "How soft is the pear?", std::nullopt).status, 202);
  svc.wait_idle("default");
  const auto run = svc.run("default-0001");
  EXPECT_EQ(run.status, 200);
  EXPECT_EQ(run.body["status"], "finished");
  EXPECT_EQ(run.body["timings"].size(), 6u);
}

TEST(Service, RunEventsArriveInContractOrder) {
  sv::Service svc(fast_config(), small_model());
  const auto labels = svc.state("default").scene.objects;
  const auto text = "Summarize the hardness of all fruits in the scene.";
  ASSERT_EQ(svc.submit_query("default", text, std::nullopt).status, 202);
  svc.wait_idle("default");
  const auto events = svc.events("default").since(0);
  std::vector<std::string> kinds;
  for (const auto& e : events) kinds.push_back(e.kind);
  std::vector<std::string> expected{"session-opened", "scene-changed", "run-started"};
  for (int i = 0; i < 6; ++i) {
    expected.push_back("stage-started");
    expected.push_back("stage-finished");
  }
  expected.push_back("explanation");
  for (std::size_t i = 0; i < labels.size(); ++i) expected.push_back("object-result");
  expected.push_back("run-finished");
  EXPECT_EQ(kinds, expected);
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(events[i].seq, i + 1);
    EXPECT_EQ(events[i].session, "default");
  }
}

TEST(Service, IdempotencyKeysReturnTheExistingResource) {
  sv::Service svc(fast_config(), small_model());
  const auto a = svc.submit_query("default", "How hard is the apple?", "k1");
  svc.wait_idle("default");
  const auto b = svc.submit_query("default", "something else entirely", "k1");
  EXPECT_EQ(b.status, 202);
  EXPECT_EQ(a.body, b.body);
  EXPECT_EQ(svc.state("default").run_ids.size(), 1u);

  const auto r1 = svc.randomize("default", std::nullopt, 4, "k1");
  const auto r2 = svc.randomize("default", 999, 2, "k1");
  EXPECT_EQ(r1.status, 200);
  EXPECT_EQ(r1.body, r2.body);
  EXPECT_EQ(r1.body["scene"]["objects"].size(), 4u);
  const auto r3 = svc.randomize("default", 5, 2, "k2");
  EXPECT_EQ(r3.body["scene"]["objects"].size(), 2u);
}

TEST(Service, ErrorsMapToStatusCodes) {
  sv::Service svc(fast_config(), small_model());
  EXPECT_EQ(svc.run("default-0042").status, 404);
  EXPECT_EQ(svc.run("../../etc/passwd").status, 404);
  EXPECT_EQ(svc.submit_query("bad/id", "hardness of apple", std::nullopt).status, 400);
  EXPECT_EQ(svc.submit_query("default", "", std::nullopt).status, 400);
  EXPECT_EQ(svc.randomize("default", 1, 9, std::nullopt).status, 400);
  EXPECT_EQ(svc.scene("a b", false).status, 400);
  EXPECT_EQ(svc.health().body["status"], "ok");
}

TEST(Service, ReplayReconstructsStateLiveAndFromDisk) {
  TempDir dir("tactex_service_replay_test");
  sv::SessionState live;
  nlohmann::json view;
  {
    sv::Service svc(fast_config(dir.path), small_model());
    svc.submit_query("default", "How ripe is the banana?", "q1");
    svc.wait_idle("default");
    svc.randomize("default", 77, 3, "r1");
    svc.submit_query("default", "Which fruit is the hardest?", std::nullopt);
    svc.wait_idle("default");
    live = svc.state("default");
    const auto events = svc.events("default").since(0);
    EXPECT_EQ(sv::replay_session("default", events), live);
    view = sv::session_view(events);
  }
  ASSERT_EQ(live.run_ids.size(), 2u);
  EXPECT_EQ(live.idempotent.size(), 2u);

  sv::Service reopened(fast_config(dir.path), small_model());
  EXPECT_EQ(reopened.state("default"), live);
  EXPECT_EQ(sv::session_view(reopened.events("default").since(0)), view);
  const auto run = reopened.run(live.run_ids[1]);
  EXPECT_EQ(run.status, 200);
  EXPECT_EQ(run.body["query"], "Which fruit is the hardest?");
  // the idempotency map survives the restart
  EXPECT_EQ(reopened.submit_query("default", "x", "q1").body["run_id"], live.run_ids[0]);
}

TEST(SessionView, CardsWaitForTheExplanationAndOrderIsBySeq) {
  std::vector<sv::EventEnvelope> ev{
      {"s", 1, "run-started", {{"run_id", "r"}, {"query", "q"}}},
      {"s", 2, "stage-started", {{"run_id", "r"}, {"stage", "parse"}}},
      {"s", 3, "stage-finished", {{"run_id", "r"}, {"stage", "parse"}, {"duration_ms", 0.1}}},
      {"s", 4, "object-result", {{"run_id", "r"}, {"label", "lime"}}},
  };
  auto partial = sv::session_view(ev);
  EXPECT_TRUE(partial["turns"][0]["cards"].empty());
  EXPECT_EQ(partial["turns"][0]["stages"][0]["status"], "done");
  ev.push_back({"s", 5, "explanation", {{"run_id", "r"}, {"text", "t"}}});
  const auto full = sv::session_view(ev);
  EXPECT_EQ(full["turns"][0]["cards"].size(), 1u);
  EXPECT_EQ(full["turns"][0]["explanation"], "t");

  auto shuffled = ev;
  std::reverse(shuffled.begin(), shuffled.end());
  shuffled.push_back(ev[2]);  // duplicate from an overlapping replay
  EXPECT_EQ(sv::session_view(shuffled), full);
}

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    service = std::make_unique<sv::Service>(fast_config(), small_model());
    server = std::make_unique<sv::HttpServer>(*service);
    port = server->start("127.0.0.1", 0);
    ASSERT_GT(port, 0);
  }
  void TearDown() override {
    server->stop();
    server.reset();
    service.reset();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(30, 0);
    return c;
  }
  std::unique_ptr<sv::Service> service;
  std::unique_ptr<sv::HttpServer> server;
  int port = 0;
};

TEST_F(HttpTest, HealthSceneAndErrors) {
  auto c = client();
  auto res = c.Get("/v1/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(nlohmann::json::parse(res->body)["checkpoint_id"], "small");

  res = c.Get("/v1/scene");
  ASSERT_TRUE(res);
  const auto scene = nlohmann::json::parse(res->body);
  EXPECT_EQ(scene["scene"]["objects"].size(), 3u);
  // base64 of the PNG signature
  EXPECT_EQ(scene["image_png_base64"].get<std::string>().rfind("iVBORw0KGgo", 0), 0u);

  res = c.Post("/v1/query", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  res = c.Post("/v1/query", "[1,2]", "application/json");
  EXPECT_EQ(res->status, 400);
  res = c.Post("/v1/query", R"({"txt":"hi"})", "application/json");
  EXPECT_EQ(res->status, 400);
  res = c.Get("/v1/runs/nope-0001");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  res = c.Get("/v1/events?session=default&after=abc");
  EXPECT_EQ(res->status, 400);
}

TEST_F(HttpTest, QueryRoundTripWith409AndIdempotency) {
  auto c = client();
  const httplib::Headers key{{"Idempotency-Key", "abc"}};
  auto res = c.Post("/v1/query", key, R"({"text":"How ripe is the banana?"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 202);
  const auto run_id = nlohmann::json::parse(res->body)["run_id"].get<std::string>();
  auto busy = c.Post("/v1/query", R"({"text":"How hard is the apple?"})", "application/json");
  EXPECT_EQ(busy->status, 409);
  auto again = c.Post("/v1/query", key, R"({"text":"How ripe is the banana?"})", "application/json");
  EXPECT_EQ(again->status, 202);
  EXPECT_EQ(nlohmann::json::parse(again->body)["run_id"], run_id);
  service->wait_idle("default");
  res = c.Get("/v1/runs/" + run_id);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(nlohmann::json::parse(res->body)["query"], "How ripe is the banana?");

  res = c.Post("/v1/scene/randomize", R"({"seed":5,"n":2})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(nlohmann::json::parse(res->body)["scene"]["objects"].size(), 2u);
}

TEST_F(HttpTest, EventReplayMatchesTheLogAndResumesAfterLastId) {
  auto c = client();
  c.Post("/v1/query", R"({"text":"How ripe is the banana?"})", "application/json");
  service->wait_idle("default");
  const auto log = service->events("default").since(0);

  auto res = c.Get("/v1/events?session=default&follow=0");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "text/event-stream");
  EXPECT_EQ(parse_sse(res->body), log);

  res = c.Get("/v1/events?session=default&follow=0", {{"Last-Event-ID", "5"}});
  const auto tail = parse_sse(res->body);
  ASSERT_EQ(tail.size(), log.size() - 5);
  EXPECT_EQ(tail.front().seq, 6u);
}

// A client that drops mid-run and reconnects with its last id ends up with
// the same view as one that saw every event.
TEST_F(HttpTest, LiveStreamSurvivesAForcedDisconnect) {
  std::vector<sv::EventEnvelope> got;
  std::string buffer;
  std::atomic<bool> cut{false};
  std::thread first([&] {
    auto c = client();
    c.Get("/v1/events?session=default", [&](const char* data, std::size_t n) {
      buffer.append(data, n);
      // drop after the first stage finishes
      return buffer.find("event: stage-finished") == std::string::npos;
    });
    cut = true;
  });
  while (service->events("default").last_seq() < 2) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  auto c = client();
  ASSERT_EQ(c.Post("/v1/query", R"({"text":"Summarize the hardness of all fruits in the scene."})", "application/json")
                ->status,
            202);
  first.join();
  ASSERT_TRUE(cut);
  // keep whole frames only, as a browser would
  got = parse_sse(buffer.substr(0, buffer.rfind("\n\n") + 2));
  ASSERT_FALSE(got.empty());
  const auto last_id = got.back().seq;

  std::string rest;
  auto c2 = client();
  c2.Get("/v1/events?session=default", {{"Last-Event-ID", std::to_string(last_id)}},
         [&](const char* data, std::size_t n) {
           rest.append(data, n);
           return rest.find("event: run-finished") == std::string::npos;
         });
  const auto tail = parse_sse(rest.substr(0, rest.rfind("\n\n") + 2));
  ASSERT_FALSE(tail.empty());
  EXPECT_EQ(tail.front().seq, last_id + 1);
  got.insert(got.end(), tail.begin(), tail.end());

  service->wait_idle("default");
  const auto full = service->events("default").since(0);
  EXPECT_EQ(got, full);
  const auto view = sv::session_view(got);
  EXPECT_EQ(view, sv::session_view(full));
  ASSERT_EQ(view["turns"].size(), 1u);
  EXPECT_EQ(view["turns"][0]["stages"].size(), 6u);
  EXPECT_GE(view["turns"][0]["cards"].size(), 1u);
  EXPECT_FALSE(view["turns"][0]["explanation"].is_null());
}
