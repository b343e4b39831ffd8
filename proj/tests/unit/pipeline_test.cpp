#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <set>

#include "tactex/common/rng.hpp"
#include "tactex/lang/intent.hpp"
#include "tactex/pipeline/ranking.hpp"
#include "tactex/pipeline/run.hpp"
#include "tactex/pipeline/scenario.hpp"
#include "tactex/pipeline/servoing.hpp"
#include "tactex/scene/scene.hpp"

namespace pl = tactex::pipeline;
namespace sc = tactex::scene;
namespace vi = tactex::vision;
using tactex::neuro::HardnessModel;
using tactex::neuro::ModelConfig;

namespace {

const HardnessModel& small_model() {
  static const HardnessModel m = [] {
    ModelConfig c;
    c.input_size = 32;
    c.conv_channels = {4, 8};
    c.lstm_layers = 1;
    c.hidden = 8;
    c.head_hidden = 8;
    return HardnessModel(c, 3);
  }();
  return m;
}

pl::PipelineConfig noiseless() {
  pl::PipelineConfig c;
  c.detector = vi::perfect_profile();
  c.depth_noise_sigma = 0.0;
  return c;
}

pl::ObjectOutcome ok_object(const std::string& label) {
  pl::ObjectOutcome o;
  o.label = label;
  o.grounded = o.localized = o.measured = o.communicated = true;
  return o;
}

pl::RunRecord record(std::vector<pl::ObjectOutcome> objects, tactex::lang::JudgeScore judge = {5, 5, 5}) {
  pl::RunRecord r;
  r.objects = std::move(objects);
  r.judge = judge;
  return r;
}

}  // namespace

TEST(ScenarioTable, MatchesTheFourTiers) {
  const auto& t = pl::scenario_table();
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[0].prompt_template, "Identify the [property] of [object].");
  EXPECT_EQ(t[1].prompt_template, "Identify the most [property] [object] in the scene.");
  EXPECT_EQ(t[2].prompt_template, "Summarize the [property] of the [object], [object] and [object].");
  EXPECT_EQ(t[3].prompt_template, "Summarize the [property] of all fruits in the scene.");
  const int objs[] = {1, 2, 3, 5}, dmin[] = {1, 1, 3, 3}, dmax[] = {1, 1, 3, 5};
  const char* cx[] = {"Low", "Medium", "Med-High", "High"};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(t[i].id, i + 1);
    EXPECT_EQ(t[i].n_objects, objs[i]);
    EXPECT_EQ(t[i].distinct_min, dmin[i]);
    EXPECT_EQ(t[i].distinct_max, dmax[i]);
    EXPECT_EQ(t[i].explicit_targets, i < 3);
    EXPECT_EQ(t[i].complexity, cx[i]);
  }
  EXPECT_THROW(pl::scenario_spec(0), std::out_of_range);
  EXPECT_THROW(pl::scenario_spec(5), std::out_of_range);
}

TEST(ScenarioInstance, QueriesParseToTheIntendedTargets) {
  const auto lex = tactex::lang::default_lexicon();
  for (const auto& spec : pl::scenario_table()) {
    for (int r = 0; r < 10; ++r) {
      const auto inst = pl::make_instance(spec, r, 5);
      ASSERT_EQ(static_cast<int>(inst.scene.objects.size()), spec.n_objects);
      const std::set<std::string> distinct(inst.labels.begin(), inst.labels.end());
      EXPECT_GE(static_cast<int>(distinct.size()), spec.distinct_min);
      EXPECT_LE(static_cast<int>(distinct.size()), spec.distinct_max);
      const auto parsed = tactex::lang::parse_query(inst.query, lex);
      ASSERT_TRUE(parsed.ok()) << inst.query;
      EXPECT_EQ(parsed.intent->property, inst.property) << inst.query;
      if (spec.explicit_targets) {
        const std::set<std::string> targets(parsed.intent->targets.begin(), parsed.intent->targets.end());
        EXPECT_EQ(targets, distinct) << inst.query;
      } else {
        EXPECT_TRUE(parsed.intent->all_fruits());
      }
      const auto expected_mode = spec.id <= 1   ? tactex::lang::Mode::identify
                                 : spec.id == 2 ? tactex::lang::Mode::superlative
                                                : tactex::lang::Mode::summarize;
      EXPECT_EQ(parsed.intent->mode, expected_mode) << inst.query;
    }
  }
}

TEST(ScenarioInstance, ClassesAreEquallyPresentOverACycle) {
  const auto lexicon = sc::fruit_lexicon();
  for (int id : {1, 2, 3}) {
    std::map<std::string, int> seen;
    for (int r = 0; r < 10; ++r) {
      const auto inst = pl::make_instance(pl::scenario_spec(id), r, 11);
      const std::set<std::string> distinct(inst.labels.begin(), inst.labels.end());
      for (const auto& l : distinct) ++seen[l];
    }
    ASSERT_EQ(seen.size(), lexicon.size()) << "scenario " << id;
    for (const auto& [label, n] : seen) EXPECT_EQ(n, pl::scenario_spec(id).distinct_min) << label;
  }
  // scenario 4 draws 3, 4, 5 classes in turn: 12 per three runs, so over 30
  // runs every class appears exactly 12 times
  std::map<std::string, int> seen;
  for (int r = 0; r < 30; ++r) {
    const auto inst = pl::make_instance(pl::scenario_spec(4), r, 11);
    const std::set<std::string> distinct(inst.labels.begin(), inst.labels.end());
    for (const auto& l : distinct) ++seen[l];
  }
  for (const auto& [label, n] : seen) EXPECT_EQ(n, 12) << label;
}

TEST(ScenarioInstance, IsAPureFunctionOfItsSeed) {
  const auto a = pl::make_instance(pl::scenario_spec(4), 3, 9);
  const auto b = pl::make_instance(pl::scenario_spec(4), 3, 9);
  EXPECT_EQ(a.scene, b.scene);
  EXPECT_EQ(a.query, b.query);
  EXPECT_NE(pl::make_instance(pl::scenario_spec(4), 3, 10).scene, a.scene);
}

TEST(SuccessReport, OneMislocatedOfFiveGivesFourFifthsAndZero) {
  std::vector<pl::ObjectOutcome> objs;
  for (const char* l : {"apple", "kiwi", "lime", "mango", "pear"}) objs.push_back(ok_object(l));
  objs[1].localized = false;
  const auto rep = pl::summarize_runs(4, {record(objs)});
  EXPECT_DOUBLE_EQ(rep.ol_sr, 4.0 / 5.0);
  EXPECT_DOUBLE_EQ(rep.sl_sr, 0.0);
  EXPECT_TRUE(rep.mean_latency_ms.empty());
}

TEST(SuccessReport, AllPerfectAndNineOfTen) {
  std::vector<pl::RunRecord> runs(10, record({ok_object("banana")}));
  auto rep = pl::summarize_runs(1, runs);
  EXPECT_DOUBLE_EQ(rep.ol_sr, 1.0);
  EXPECT_DOUBLE_EQ(rep.sl_sr, 1.0);

  runs[4].objects[0].grounded = false;
  runs[4].judge = {1, 1, 5};
  rep = pl::summarize_runs(1, runs);
  EXPECT_DOUBLE_EQ(rep.ol_sr, 0.9);
  EXPECT_DOUBLE_EQ(rep.sl_sr, 0.9);
  EXPECT_EQ(rep.succeeded_runs, 9);
}

TEST(SuccessReport, JudgeGatesTheScenarioNotTheObjects) {
  auto r = record({ok_object("lime"), ok_object("lemon")}, {3, 5, 5});
  auto rep = pl::summarize_runs(3, {r});
  EXPECT_DOUBLE_EQ(rep.ol_sr, 1.0);
  EXPECT_DOUBLE_EQ(rep.sl_sr, 0.0);
  r.judge = {4, 4, 5};
  EXPECT_DOUBLE_EQ(pl::summarize_runs(3, {r}).sl_sr, 0.0);
  r.judge = {4, 5, 1};
  EXPECT_DOUBLE_EQ(pl::summarize_runs(3, {r}).sl_sr, 1.0);
}

TEST(SuccessReport, LatencyAveragesSucceededRunsOnly) {
  auto good = record({ok_object("pear")});
  good.timings = {{pl::Stage::detect, 10.0}, {pl::Stage::inference, 4.0}};
  good.total_ms = 14.0;
  auto good2 = good;
  good2.timings = {{pl::Stage::detect, 30.0}, {pl::Stage::inference, 8.0}};
  good2.total_ms = 38.0;
  auto bad = good;
  bad.objects[0].measured = false;
  bad.timings = {{pl::Stage::detect, 1000.0}, {pl::Stage::inference, 1000.0}};
  const auto rep = pl::summarize_runs(1, {good, bad, good2});
  EXPECT_DOUBLE_EQ(rep.mean_latency_ms.at(pl::Stage::detect), 20.0);
  EXPECT_DOUBLE_EQ(rep.mean_latency_ms.at(pl::Stage::inference), 6.0);
  EXPECT_DOUBLE_EQ(rep.mean_total_ms, 26.0);
  const auto j = pl::to_json(rep, false);
  EXPECT_FALSE(j.contains("mean_latency_ms"));
  EXPECT_DOUBLE_EQ(pl::to_json(rep, true)["mean_latency_ms"]["detect"].get<double>(), 20.0);
}

TEST(SuccessReport, ExclusionDropsRunsWithTheClass) {
  auto kiwi_fail = record({ok_object("kiwi"), ok_object("apple")});
  kiwi_fail.objects[0].grounded = false;
  const std::vector<pl::RunRecord> runs{kiwi_fail, record({ok_object("apple")}), record({ok_object("pear")})};
  const auto all = pl::summarize_runs(3, runs);
  EXPECT_EQ(all.runs, 3);
  EXPECT_NEAR(all.ol_sr, (0.5 + 1 + 1) / 3.0, 1e-12);
  const auto wo = pl::summarize_runs(3, runs, {"kiwi"});
  EXPECT_EQ(wo.runs, 2);
  EXPECT_DOUBLE_EQ(wo.ol_sr, 1.0);
  EXPECT_DOUBLE_EQ(wo.sl_sr, 1.0);
}

// Independent recount over random outcome sets; SL-SR can never exceed OL-SR.
TEST(SuccessReport, RandomReportsAgreeWithRecountAndSlNeverExceedsOl) {
  tactex::Rng rng(77);
  std::bernoulli_distribution flip(0.85);
  std::uniform_int_distribution<int> n_obj(1, 5), n_runs(1, 10), score(1, 5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<pl::RunRecord> runs;
    double ol_sum = 0.0;
    int sl = 0;
    const int R = n_runs(rng);
    for (int r = 0; r < R; ++r) {
      pl::RunRecord rec;
      rec.judge = {score(rng), score(rng), score(rng)};
      const int n = n_obj(rng);
      int ok = 0;
      for (int i = 0; i < n; ++i) {
        pl::ObjectOutcome o;
        o.grounded = flip(rng);
        o.localized = flip(rng);
        o.measured = flip(rng);
        o.communicated = flip(rng);
        ok += o.grounded && o.localized && o.measured && o.communicated;
        rec.objects.push_back(o);
      }
      ol_sum += static_cast<double>(ok) / n;
      sl += ok == n && rec.judge.accuracy >= 4 && rec.judge.completeness == 5;
      runs.push_back(rec);
    }
    const auto rep = pl::summarize_runs(1, runs);
    EXPECT_NEAR(rep.ol_sr, ol_sum / R, 1e-12);
    EXPECT_NEAR(rep.sl_sr, static_cast<double>(sl) / R, 1e-12);
    EXPECT_LE(rep.sl_sr, rep.ol_sr + 1e-12);
  }
}

TEST(RunQuery, NoiselessSingleObjectSucceeds) {
  const auto inst = pl::make_instance(pl::scenario_spec(1), 0, 1);
  const auto rec = pl::run_query(inst.scene, inst.query, small_model(), noiseless(), 5);
  ASSERT_EQ(rec.objects.size(), 1u);
  const auto& o = rec.objects[0];
  EXPECT_TRUE(o.grounded);
  EXPECT_TRUE(o.localized);
  EXPECT_TRUE(o.measured);
  EXPECT_TRUE(o.communicated) << rec.explanation;
  EXPECT_NEAR(o.centroid_error_mm, 0.0, 1e-9);
  EXPECT_TRUE(rec.scenario_success());
  EXPECT_TRUE(rec.errors.empty());
  EXPECT_NE(rec.explanation.find("The " + inst.labels[0] + " at the "), std::string::npos) << rec.explanation;
}

TEST(RunQuery, MissedTargetIsReportedNotFound) {
  const auto scene = sc::generate_scene_with_labels(3, {"banana", "kiwi"});
  auto cfg = noiseless();
  cfg.detector.miss_rate = 1.0;
  const auto rec = pl::run_query(scene, "How ripe is the banana?", small_model(), cfg, 2);
  ASSERT_EQ(rec.objects.size(), 1u);
  EXPECT_EQ(rec.objects[0].label, "banana");
  EXPECT_FALSE(rec.objects[0].grounded);
  EXPECT_FALSE(rec.objects[0].localized);
  EXPECT_FALSE(rec.objects[0].measured);
  EXPECT_FALSE(rec.objects[0].hardness_estimate.has_value());
  EXPECT_EQ(rec.objects[0].failure, "not detected");
  EXPECT_NE(rec.explanation.find("No banana was found in the scene."), std::string::npos);
  EXPECT_EQ(rec.timings.size(), pl::kStages.size());
  EXPECT_EQ(rec.object_success_rate(), 0.0);
  EXPECT_FALSE(rec.scenario_success());
}

TEST(RunQuery, SevenMillimetreErrorIsNotLocalized) {
  const auto inst = pl::make_instance(pl::scenario_spec(1), 2, 1);
  auto cfg = noiseless();
  cfg.centroid_offset_x_mm = 7.0;
  const auto far = pl::run_query(inst.scene, inst.query, small_model(), cfg, 5);
  ASSERT_EQ(far.objects.size(), 1u);
  EXPECT_TRUE(far.objects[0].grounded);
  EXPECT_NEAR(far.objects[0].centroid_error_mm, 7.0, 1e-9);
  EXPECT_FALSE(far.objects[0].localized);
  EXPECT_FALSE(far.objects[0].measured);
  EXPECT_EQ(pl::summarize_runs(1, {far}).ol_sr, 0.0);

  cfg.centroid_offset_x_mm = 3.0;
  cfg.centroid_offset_y_mm = -3.0;
  const auto near = pl::run_query(inst.scene, inst.query, small_model(), cfg, 5);
  EXPECT_NEAR(near.objects[0].centroid_error_mm, std::sqrt(18.0), 1e-9);
  EXPECT_TRUE(near.objects[0].localized);
  EXPECT_TRUE(near.objects[0].measured);
}

TEST(RunQuery, UnparseableQueryFailsEveryObjectWithoutThrowing) {
  const auto scene = sc::generate_scene_with_labels(4, {"apple", "pear"});
  const auto rec = pl::run_query(scene, "hello there", small_model(), noiseless(), 1);
  EXPECT_FALSE(rec.intent.has_value());
  ASSERT_EQ(rec.objects.size(), 2u);
  for (const auto& o : rec.objects) EXPECT_FALSE(o.succeeded());
  EXPECT_FALSE(rec.errors.empty());
  EXPECT_NE(rec.explanation.find("could not understand"), std::string::npos);
  ASSERT_EQ(rec.timings.size(), 2u);
  EXPECT_EQ(rec.timings[0].stage, pl::Stage::parse);
  EXPECT_EQ(rec.timings[1].stage, pl::Stage::explanation);
}

TEST(RunQuery, StageTimingsTileTheRunAndEventsPair) {
  const auto inst = pl::make_instance(pl::scenario_spec(3), 1, 2);
  std::vector<nlohmann::json> events;
  const auto rec = pl::run_query(inst.scene, inst.query, small_model(), pl::PipelineConfig{}, 8,
                                 [&](const nlohmann::json& e) { events.push_back(e); });
  ASSERT_EQ(rec.timings.size(), pl::kStages.size());
  for (std::size_t i = 0; i < pl::kStages.size(); ++i) {
    EXPECT_EQ(rec.timings[i].stage, pl::kStages[i]);
    EXPECT_GE(rec.timings[i].duration_ms, 0.0);
  }
  EXPECT_NEAR(rec.total_ms, rec.stage_sum_ms(), 2.0);
  EXPECT_GE(rec.total_ms, rec.stage_sum_ms());

  ASSERT_EQ(events.size(), 2 * pl::kStages.size());
  const std::regex hex("[0-9a-f]{16}");
  double last_t = -1.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    EXPECT_EQ(e["type"], "stage");
    EXPECT_EQ(e["stage"], pl::to_string(pl::kStages[i / 2]));
    EXPECT_EQ(e["status"], i % 2 ? "finished" : "started");
    EXPECT_TRUE(std::regex_match(e["digest"].get<std::string>(), hex));
    EXPECT_GE(e["t_ms"].get<double>(), last_t);
    last_t = e["t_ms"].get<double>();
    if (i % 2) EXPECT_EQ(e["digest"], pl::payload_digest(e["payload"]));
  }
}

TEST(RunQuery, ThrowingListenerDoesNotBreakTheRun) {
  const auto inst = pl::make_instance(pl::scenario_spec(1), 0, 1);
  const auto quiet = pl::run_query(inst.scene, inst.query, small_model(), noiseless(), 5);
  const auto loud = pl::run_query(inst.scene, inst.query, small_model(), noiseless(), 5,
                                   [](const nlohmann::json&) { throw std::runtime_error("listener gone"); });
  EXPECT_EQ(pl::to_json(quiet, false), pl::to_json(loud, false));
}

TEST(RunQuery, UnreachableExternalExplainerDegradesToTemplate) {
  const auto inst = pl::make_instance(pl::scenario_spec(1), 0, 1);
  auto cfg = noiseless();
  const auto plain = pl::run_query(inst.scene, inst.query, small_model(), cfg, 5);
  cfg.backend = tactex::lang::Backend::external;
  cfg.lang.client.host = "127.0.0.1";
  cfg.lang.client.port = 1;
  cfg.lang.client.timeout_s = 0.5;
  const auto rec = pl::run_query(inst.scene, inst.query, small_model(), cfg, 5);
  EXPECT_TRUE(rec.degraded);
  EXPECT_EQ(rec.explanation, plain.explanation);
  EXPECT_TRUE(rec.scenario_success());
}

TEST(RunScenario, SameSeedSameReport) {
  const auto a = pl::run_scenario(pl::scenario_spec(2), 3, small_model(), pl::PipelineConfig{}, 42);
  const auto b = pl::run_scenario(pl::scenario_spec(2), 3, small_model(), pl::PipelineConfig{}, 42);
  ASSERT_EQ(a.records.size(), 3u);
  EXPECT_EQ(pl::to_json(a, false).dump(), pl::to_json(b, false).dump());
  for (const auto& r : a.records) {
    EXPECT_EQ(r.scenario_id, 2);
    EXPECT_EQ(r.objects.size(), 2u);
  }
}

TEST(RunScenario, RaisingMissRateNeverRaisesObjectSuccess) {
  double last = 2.0;
  for (double miss : {0.0, 0.3, 0.6, 1.0}) {
    pl::PipelineConfig cfg;
    cfg.detector.miss_rate = miss;
    const auto res = pl::run_scenario(pl::scenario_spec(3), 3, small_model(), cfg, 17);
    EXPECT_LE(res.report.ol_sr, last + 1e-12) << "miss rate " << miss;
    last = res.report.ol_sr;
  }
  EXPECT_EQ(last, 0.0);
}

TEST(Servoing, ZeroNoiseIsExactAndBelowTolerance) {
  pl::ServoingOptions opt;
  opt.n_scenes = 3;
  opt.depth_noise_sigma = 0.0;
  opt.seed = 4;
  const auto rep = pl::evaluate_servoing({vi::perfect_profile()}, opt);
  const auto& p = rep.profiles.at(0);
  ASSERT_GT(p.successes, 0);
  EXPECT_EQ(p.successes, p.attempts);
  for (double v : p.iou) EXPECT_EQ(v, 1.0);
  for (double e : p.error_mm) EXPECT_NEAR(e, 0.0, 1e-9);
  EXPECT_LT(p.error_vs_tolerance(5.0, tactex::stats::Alternative::less).p_value, 0.01);
  EXPECT_GT(p.error_vs_tolerance(5.0, tactex::stats::Alternative::greater).p_value, 0.01);
}

TEST(Servoing, TwoProfilesGetWelchTests) {
  pl::ServoingOptions opt;
  opt.n_scenes = 6;
  opt.ablations = false;
  opt.seed = 5;
  const auto rep = pl::evaluate_servoing({vi::yolo_like_profile(), vi::gsam_like_profile()}, opt);
  ASSERT_EQ(rep.profiles.size(), 2u);
  EXPECT_EQ(rep.profiles[0].attempts, rep.profiles[1].attempts);
  ASSERT_TRUE(rep.welch_iou.has_value());
  // the closed-set profile draws the wider boundary noise
  EXPECT_LT(tactex::stats::mean(rep.profiles[0].iou), tactex::stats::mean(rep.profiles[1].iou));
  const auto j = pl::to_json(rep);
  EXPECT_EQ(j["profiles"].size(), 2u);
  EXPECT_FALSE(j["profiles"][0].contains("ablation"));
}

TEST(Servoing, DegenerateOneSampleTest) {
  using tactex::stats::Alternative;
  EXPECT_EQ(pl::one_sample_t_or_degenerate({2.0, 2.0}, 5.0, Alternative::less).p_value, 0.0);
  EXPECT_EQ(pl::one_sample_t_or_degenerate({2.0, 2.0}, 5.0, Alternative::greater).p_value, 1.0);
  EXPECT_EQ(pl::one_sample_t_or_degenerate({5.0}, 5.0, Alternative::two_sided).p_value, 1.0);
  EXPECT_THROW(pl::one_sample_t_or_degenerate({}, 5.0, Alternative::less), std::invalid_argument);
}

TEST(Ranking, ProtocolGaps) {
  for (const auto& f : pl::default_ranking_families()) {
    ASSERT_GE(f.stages.size(), 2u);
    for (std::size_t i = 1; i < f.stages.size(); ++i)
      EXPECT_GE(f.stages[i - 1].hardness - f.stages[i].hardness, 4.0) << f.fruit;
  }
  const auto tie = pl::near_tie_lime();
  EXPECT_LT(tie.stages[0].hardness - tie.stages[1].hardness, 1.0);
  EXPECT_GT(tie.stages[0].hardness, tie.stages[1].hardness);
}

TEST(Ranking, ReportShapeOnASmallModel) {
  pl::RankingOptions opt;
  opt.samples_per_stage = 4;
  const auto r = pl::evaluate_family(pl::default_ranking_families()[3], small_model(), opt);
  ASSERT_EQ(r.predictions.size(), 3u);
  for (const auto& p : r.predictions) EXPECT_EQ(p.size(), 4u);
  EXPECT_EQ(r.report.comparisons.size(), 3u);
  const auto j = pl::to_json(r);
  EXPECT_EQ(j["stages"].size(), 3u);
  EXPECT_THROW(pl::evaluate_family({"durian", {{"a", 70}, {"b", 60}}}, small_model(), opt), std::invalid_argument);
}
