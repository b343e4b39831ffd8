// tactex: data generation, training, evaluation and the HTTP server.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tactex/neuro/checkpoint.hpp"
#include "tactex/pipeline/protocol.hpp"
#include "tactex/pipeline/ranking.hpp"
#include "tactex/pipeline/scenario.hpp"
#include "tactex/pipeline/servoing.hpp"
#include "tactex/service/config.hpp"
#include "tactex/service/http.hpp"
#include "tactex/service/service.hpp"
#include "tactex/tactile/dataset.hpp"

namespace fs = std::filesystem;
using namespace tactex;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string config;
  std::string out = ".";
};

service::AppConfig app_config(const Globals& g) {
  return g.config.empty() ? service::AppConfig{} : service::load_app_config(g.config);
}

pipeline::PipelineConfig pipeline_config(const service::AppConfig& app) {
  pipeline::PipelineConfig c;
  c.detector = app.detector;
  c.depth_noise_sigma = app.depth_noise_sigma;
  c.localize_tolerance_mm = app.localize_tolerance_mm;
  c.lang = app.lang;
  c.backend = app.explainer;
  return c;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  std::cerr << "wrote " << path.string() << '\n';
}

neuro::HardnessModel load_model(const std::string& checkpoint) {
  if (checkpoint.empty()) throw std::invalid_argument("--checkpoint is required");
  return neuro::load_checkpoint(checkpoint);
}

service::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visuo-tactile hardness estimation toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Base seed")->capture_default_str();
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a tactile corpus");
  std::string profile = "finetune";
  std::size_t count = 1000;
  int poses = tactile::kFinetunePoses;
  gen->add_option("--profile", profile, "pretrain | finetune | fruit")
      ->check(CLI::IsMember({"pretrain", "finetune", "fruit"}))
      ->capture_default_str();
  gen->add_option("--count", count, "Clips for pretrain and fruit")->capture_default_str();
  gen->add_option("--poses", poses, "Poses per object for finetune")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Pretrain, fine-tune and evaluate on held-out fruit presses");
  pipeline::ProtocolOptions protocol;
  bool no_direct = false;
  train->add_option("--pretrain-clips", protocol.pretrain_clips)->capture_default_str();
  train->add_option("--poses", protocol.finetune_poses)->capture_default_str();
  train->add_option("--heldout", protocol.heldout_clips)->capture_default_str();
  train->add_flag("--no-direct", no_direct, "Skip the direct-training baseline");

  // eval-tactile
  auto* tact = app.add_subcommand("eval-tactile", "Ripeness ranking test on fruit families");
  std::string checkpoint;
  pipeline::RankingOptions ranking;
  tact->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  tact->add_option("--samples", ranking.samples_per_stage, "Presses per stage")->capture_default_str();

  // eval-servoing
  auto* servo = app.add_subcommand("eval-servoing", "Localization accuracy over random scenes");
  pipeline::ServoingOptions servoing;
  std::vector<std::string> profiles{"gsam-like", "yolo-like"};
  servo->add_option("--scenes", servoing.n_scenes)->capture_default_str();
  servo->add_option("--profiles", profiles, "Detector profiles")->delimiter(',')->capture_default_str();

  // run-scenarios
  auto* scen = app.add_subcommand("run-scenarios", "Query scenarios of increasing complexity");
  int scenario = 0, runs = 10;
  scen->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  scen->add_option("--scenario", scenario, "1-4, or 0 for all")->check(CLI::Range(0, 4))->capture_default_str();
  scen->add_option("--runs", runs)->check(CLI::PositiveNumber)->capture_default_str();

  // serve
  auto* serve = app.add_subcommand("serve", "Start the HTTP server");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--checkpoint", checkpoint)->check(CLI::ExistingFile);
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = app_config(g);
    const fs::path out(g.out);

    if (gen->parsed()) {
      tactile::GenerationStats stats;
      std::vector<tactile::TactileClip> clips;
      if (profile == "pretrain") clips = tactile::generate_pretrain_set(count, g.seed, {}, &stats);
      if (profile == "finetune") clips = tactile::generate_finetune_set(g.seed, poses, {}, &stats);
      if (profile == "fruit") clips = tactile::generate_fruit_set(count, g.seed, 60.0, 90.0, {}, &stats);
      tactile::save_dataset(clips, out / profile, profile);
      write_json(out / (profile + "_summary.json"), {{"profile", profile},
                                                     {"seed", g.seed},
                                                     {"clips", clips.size()},
                                                     {"presses", stats.requested},
                                                     {"rejected", stats.rejected}});
    } else if (train->parsed()) {
      protocol.seed = g.seed;
      protocol.train = cfg.train;
      protocol.direct_baseline = !no_direct;
      const auto r = pipeline::run_training_protocol(protocol, [](const neuro::EpochRecord& e) {
        std::cerr << e.phase << ' ' << e.epoch << " loss " << e.train_loss << " val rmse " << e.val_rmse << '\n';
      });
      neuro::save_checkpoint(r.model, out / "checkpoint.json",
                             {{"seed", g.seed}, {"train", neuro::to_json(protocol.train)}});
      neuro::write_history_csv(r.history, out / "history.csv");
      auto metrics = pipeline::to_json(r);
      metrics["seed"] = g.seed;
      write_json(out / "metrics.json", metrics);
      std::cerr << "trained in " << r.seconds << " s\n";
    } else if (tact->parsed()) {
      const auto model = load_model(checkpoint);
      ranking.seed = g.seed;
      auto families = pipeline::default_ranking_families();
      families.push_back(pipeline::near_tie_lime());
      nlohmann::json j{{"seed", g.seed}, {"alpha", ranking.alpha}, {"families", nlohmann::json::array()}};
      for (const auto& r : pipeline::evaluate_ranking(families, model, ranking)) j["families"].push_back(pipeline::to_json(r));
      write_json(out / "ranking.json", j);
    } else if (servo->parsed()) {
      servoing.seed = g.seed;
      servoing.depth_noise_sigma = cfg.depth_noise_sigma;
      servoing.tolerance_mm = cfg.localize_tolerance_mm;
      std::vector<vision::DetectorProfile> ps;
      for (const auto& name : profiles) ps.push_back(name == cfg.detector.name ? cfg.detector : vision::profile_by_name(name));
      write_json(out / "servoing.json", pipeline::to_json(pipeline::evaluate_servoing(ps, servoing)));
    } else if (scen->parsed()) {
      const auto model = load_model(checkpoint);
      const auto pc = pipeline_config(cfg);
      nlohmann::json report{{"seed", g.seed}, {"detector", service::to_json(cfg.detector)}, {"scenarios", nlohmann::json::array()}};
      nlohmann::json latency{{"seed", g.seed}, {"scenarios", nlohmann::json::array()}};
      for (const auto& spec : pipeline::scenario_table()) {
        if (scenario != 0 && spec.id != scenario) continue;
        const auto r = pipeline::run_scenario(spec, runs, model, pc, g.seed);
        report["scenarios"].push_back(pipeline::to_json(r, false));
        latency["scenarios"].push_back(pipeline::to_json(r.report, true));
        std::cerr << "scenario " << spec.id << ": OL-SR " << r.report.ol_sr << " SL-SR " << r.report.sl_sr << '\n';
      }
      write_json(out / "scenarios.json", report);
      write_json(out / "latency.json", latency);
    } else if (serve->parsed()) {
      service::ServiceConfig sc;
      sc.data_dir = out;
      sc.pipeline = pipeline_config(cfg);
      sc.seed = g.seed;
      auto model = checkpoint.empty() ? neuro::HardnessModel(neuro::ModelConfig{}, g.seed) : neuro::load_checkpoint(checkpoint);
      sc.checkpoint_id = checkpoint.empty() ? "untrained" : fs::path(checkpoint).stem().string();
      if (checkpoint.empty()) std::cerr << "warning: no --checkpoint, serving an untrained model\n";
      service::Service svc(sc, std::move(model));
      service::HttpServer server(svc);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on http://" << host << ':' << port << "/v1\n";
      if (!server.listen(host, port)) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    }
  } catch (const std::exception& e) {
    std::cerr << "tactex: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
