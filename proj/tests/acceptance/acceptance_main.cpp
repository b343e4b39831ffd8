// End-to-end acceptance checks. One PASS/FAIL line per criterion; exits
// nonzero when any fails. Artifacts go to --out.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tactex/common/rng.hpp"
#include "tactex/neuro/checkpoint.hpp"
#include "tactex/neuro/gradcheck.hpp"
#include "tactex/neuro/loss.hpp"
#include "tactex/neuro/optim.hpp"
#include "tactex/pipeline/protocol.hpp"
#include "tactex/pipeline/ranking.hpp"
#include "tactex/pipeline/scenario.hpp"
#include "tactex/pipeline/servoing.hpp"
#include "tactex/stats/descriptive.hpp"
#include "tactex/stats/tests.hpp"
#include "tactex/tactile/contact.hpp"
#include "tactex/tactile/dataset.hpp"

namespace fs = std::filesystem;
namespace nn = tactex::neuro;
namespace pl = tactex::pipeline;
namespace ts = tactex::stats;
namespace tt = tactex::tactile;
using tactex::Rng;

namespace {

// Pinned tolerances.
constexpr double kGradRelTol = 1e-4;
constexpr double kGradSeconds = 60.0;
constexpr double kLossTol = 1e-9;
constexpr double kMinRho = 0.85;
constexpr double kMinR2 = 0.6;
constexpr double kTrainSeconds = 15 * 60.0;
constexpr double kAlpha = 0.01;
constexpr double kPTol = 1e-12;
constexpr double kWelchDfTol = 1e-9;
constexpr double kToleranceMm = 5.0;
constexpr double kGateShare = 0.95;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream(path) << j.dump(2) << '\n';
}

// ---- 1. gradients --------------------------------------------------------

nn::Sequence bump_sequence(int size, int frames, double level, Rng& rng) {
  nn::Sequence s;
  const double c = 0.5 * (size - 1), w = size / 5.0;
  for (int t = 0; t < frames; ++t) {
    tactex::GrayImage g(size, size);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        g.at(x, y) = level * (t + 1) * std::exp(-((x - c) * (x - c) + (y - c) * (y - c)) / (2 * w * w)) +
                     tactex::gaussian(rng, 0.0, 3.0);
    s.push_back(g);
  }
  return s;
}

Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  auto cfg = nn::ModelConfig::reduced();
  cfg.output_offset = 0.0;
  cfg.output_scale = 1.0;
  nn::HardnessModel m(cfg, 5);
  Rng rng(9);
  std::vector<nn::Sequence> batch;
  std::vector<double> labels;
  for (int i = 0; i < 6; ++i) {
    batch.push_back(bump_sequence(cfg.input_size, 2, 20.0 + 15 * i, rng));
    labels.push_back(-1.5 + 0.6 * i);
  }
  // move off the initial point where the variance penalty is saturated
  nn::AdamW opt(m.parameters(), {1e-3, 1e-2, 0.9, 0.999, 1e-8, 0.0});
  Rng unused(0);
  for (int s = 0; s < 100; ++s) {
    opt.zero_grad();
    nn::hardness_loss(m.forward(batch, false, unused), nn::Tensor::from({6}, labels)).backward();
    opt.step();
  }
  const auto r = nn::gradient_check(m, batch, labels, 1e-5);
  const double secs = seconds_since(t0);
  const bool pass = r.checked == m.parameter_count() && r.max_relative_error < kGradRelTol && secs < kGradSeconds;
  return {pass, "max rel err " + fmt(r.max_relative_error) + " over " + std::to_string(r.checked) + " entries (" +
                    r.worst_parameter + "), " + fmt(secs, 3) + " s"};
}

// ---- 2. loss ---------------------------------------------------------------

Outcome loss_exactness() {
  const std::vector<double> flat{65.0, 65.0, 65.0, 65.0}, l{60.0, 62.0, 70.0, 75.0};
  const auto t = nn::loss_terms(flat, l);
  const double autograd_flat =
      nn::hardness_loss(nn::Tensor::from({4}, flat), nn::Tensor::from({4}, l)).values()[0];
  const double mse_flat = (25.0 + 9.0 + 25.0 + 100.0) / 4.0;
  const std::vector<double> p{60.0, 70.0};
  const double want = 4.0 / 25.000001;
  const double got = nn::loss_terms(p, p).total;
  const double got_tensor = nn::hardness_loss(nn::Tensor::from({2}, p), nn::Tensor::from({2}, p)).values()[0];
  const bool pass = t.penalty == 4000.0 && autograd_flat == mse_flat + 4000.0 && std::abs(got - want) < kLossTol &&
                    std::abs(got_tensor - want) < kLossTol;
  return {pass, "constant-batch penalty " + fmt(t.penalty, 10) + "; [60,70] loss " + fmt(got, 12) + " vs " +
                    fmt(want, 12)};
}

// ---- 3. training -------------------------------------------------------------

struct Trained {
  std::optional<nn::HardnessModel> model;
  fs::path checkpoint;
};

Outcome training(const fs::path& out, Trained& trained) {
  pl::ProtocolOptions o;
  o.seed = 0;
  const auto r = pl::run_training_protocol(o);
  trained.model = r.model;
  trained.checkpoint = out / "checkpoint.json";
  nn::save_checkpoint(r.model, trained.checkpoint, {{"seed", o.seed}});
  nn::write_history_csv(r.history, out / "history.csv");
  auto j = pl::to_json(r);
  j["seconds"] = r.seconds;
  write_json(out / "training.json", j);
  const auto& f = r.finetuned;
  const bool direct_lower = r.direct && r.direct->rho < f.rho;
  const bool pass = f.rho >= kMinRho && f.r2 >= kMinR2 && direct_lower && r.seconds < kTrainSeconds;
  return {pass, "held-out rho " + fmt(f.rho) + " R2 " + fmt(f.r2) + " rmse " + fmt(f.rmse) + "; direct rho " +
                    (r.direct ? fmt(r.direct->rho) : "n/a") + "; " + fmt(r.seconds, 4) + " s"};
}

// ---- 4. ranking ---------------------------------------------------------------

Outcome ranking(const nn::HardnessModel& model, const fs::path& out) {
  pl::RankingOptions o;
  o.seed = 0;
  auto families = pl::default_ranking_families();
  for (const auto& f : families)
    for (std::size_t i = 0; i + 1 < f.stages.size(); ++i)
      if (f.stages[i].hardness - f.stages[i + 1].hardness < 4.0) return {false, f.fruit + " gap below 4 HA"};
  const auto results = pl::evaluate_ranking(families, model, o);
  const auto tie = pl::evaluate_family(pl::near_tie_lime(), model, o);
  nlohmann::json j = nlohmann::json::array();
  bool pass = true;
  double worst = 0.0;
  std::string detail;
  for (const auto& r : results) {
    j.push_back(pl::to_json(r));
    for (const auto& c : r.report.comparisons) worst = std::max(worst, c.p_adjusted);
    if (!r.all_significant(kAlpha)) {
      pass = false;
      detail += r.family.fruit + " not significant; ";
    }
  }
  j.push_back(pl::to_json(tie));
  write_json(out / "ranking.json", j);
  const double tie_p = tie.report.comparisons.at(0).p_adjusted;
  if (tie_p < kAlpha) {
    pass = false;
    detail += "near-tie lime significant; ";
  }
  return {pass, detail + std::to_string(results.size()) + " families, worst adjusted p " + fmt(worst) +
                    "; near-tie lime p " + fmt(tie_p)};
}

// ---- 5. statistics oracles -----------------------------------------------------

// Rank-sum tails by enumerating every assignment of pooled ranks to group a.
std::pair<double, double> enumerate_tails(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size();
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double less = 0, equal = 0;
    for (std::size_t k = 0; k < n; ++k) {
      less += pooled[k] < pooled[i];
      equal += pooled[k] == pooled[i];
    }
    rank[i] = less + (equal + 1) / 2.0;
  }
  double observed = 0;
  for (std::size_t i = 0; i < a.size(); ++i) observed += rank[i];
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(a.size()), true);
  double total = 0, ge = 0, le = 0;
  do {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (pick[i]) s += rank[i];
    total += 1;
    ge += s >= observed - 1e-9;
    le += s <= observed + 1e-9;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return {ge / total, le / total};
}

// Holm by the textbook definition: adj_(k) = max_{j<=k} min(1, (m-j+1) p_(j)).
std::vector<double> holm_reference(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return p[x] < p[y]; });
  std::vector<double> out(m);
  for (std::size_t k = 0; k < m; ++k) {
    double v = 0;
    for (std::size_t j = 0; j <= k; ++j) v = std::max(v, std::min(1.0, static_cast<double>(m - j) * p[order[j]]));
    out[order[k]] = v;
  }
  return out;
}

Outcome stats_oracles() {
  Rng rng(2024);
  int pairs = 0;
  double worst_p = 0.0;
  for (std::size_t n1 = 1; n1 < 10; ++n1) {
    for (std::size_t n2 = 1; n1 + n2 <= 10; ++n2) {
      for (int variant = 0; variant < 3; ++variant) {
        std::vector<double> a(n1), b(n2);
        // 0: continuous, 1: heavy ties, 2: shifted continuous
        for (auto& v : a) v = variant == 1 ? static_cast<double>(rng() % 4) : tactex::gaussian(rng, variant == 2, 1);
        for (auto& v : b) v = variant == 1 ? static_cast<double>(rng() % 4) : tactex::gaussian(rng, 0, 1);
        const auto [ge, le] = enumerate_tails(a, b);
        const double two = std::min(1.0, 2 * std::min(ge, le));
        const auto method = ts::RankSumMethod::exact;
        worst_p = std::max({worst_p, std::abs(ts::wilcoxon_rank_sum(a, b, ts::Alternative::greater, method).p_value - ge),
                            std::abs(ts::wilcoxon_rank_sum(a, b, ts::Alternative::less, method).p_value - le),
                            std::abs(ts::wilcoxon_rank_sum(a, b, ts::Alternative::two_sided, method).p_value - two)});
        ++pairs;
      }
    }
  }
  double worst_holm = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(2 + rng() % 9);
    for (auto& v : p) v = trial % 4 == 0 ? 0.01 * static_cast<double>(1 + rng() % 5) : tactex::uniform(rng, 0.0, 0.3);
    const auto got = ts::holm_correct(p);
    const auto want = holm_reference(p);
    for (std::size_t i = 0; i < p.size(); ++i) worst_holm = std::max(worst_holm, std::abs(got[i] - want[i]));
  }
  double worst_df = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(2 + rng() % 30), b(2 + rng() % 30);
    for (auto& v : a) v = tactex::gaussian(rng, 0, 1 + trial % 5);
    for (auto& v : b) v = tactex::gaussian(rng, 1, 0.5);
    auto mean_var = [](const std::vector<double>& x) {
      const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
      double s = 0;
      for (double v : x) s += (v - m) * (v - m);
      return s / static_cast<double>(x.size() - 1);
    };
    const double va = mean_var(a) / static_cast<double>(a.size()), vb = mean_var(b) / static_cast<double>(b.size());
    const double df = (va + vb) * (va + vb) /
                      (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
    worst_df = std::max(worst_df, std::abs(ts::welch_df(a, b) - df) / df);
    worst_df = std::max(worst_df, std::abs(ts::welch_t(a, b).df - df) / df);
  }
  const bool pass = worst_p < kPTol && worst_holm < kPTol && worst_df < kWelchDfTol;
  return {pass, std::to_string(pairs) + " rank-sum cases, max |dp| " + fmt(worst_p) + "; Holm max diff " +
                    fmt(worst_holm) + "; Welch df max rel diff " + fmt(worst_df)};
}

// ---- 6. servoing ----------------------------------------------------------------

Outcome servoing(const fs::path& out) {
  auto profile = tactex::vision::gsam_like_profile();
  profile.boundary_noise = 1.0;
  pl::ServoingOptions o;
  o.n_scenes = 200;
  o.depth_noise_sigma = 2.0;
  o.tolerance_mm = kToleranceMm;
  o.seed = 6;
  const auto rep = pl::evaluate_servoing({profile}, o);
  write_json(out / "servoing.json", pl::to_json(rep));
  const auto& p = rep.profiles.at(0);
  const auto mean = [](const std::vector<double>& v) { return ts::mean(v); };
  const auto t = p.error_vs_tolerance(kToleranceMm, ts::Alternative::greater);
  const double e = mean(p.error_mm), nr = mean(p.error_no_refine_mm), nm = mean(p.error_no_median_mm);
  const bool pass = !p.error_mm.empty() && t.p_value >= kAlpha && nr > e && nm > e;
  return {pass, std::to_string(p.error_mm.size()) + " localized objects, mean error " + fmt(e) + " mm (t vs 5 mm, greater: p " +
                    fmt(t.p_value) + "); no refine " + fmt(nr) + " mm, no median " + fmt(nm) + " mm"};
}

// ---- 7. contact gating -----------------------------------------------------------

Outcome contact_gating() {
  const tt::GelConfig gel;
  const auto collection = tt::collection_criteria();
  const auto pretrain = tt::pretrain_criteria();
  int earlier_or_equal = 0, violations = 0;
  constexpr int kTrials = 100;
  for (int i = 0; i < kTrials; ++i) {
    Rng rng(tactex::derive_seed(77, static_cast<std::uint64_t>(i)));
    const double h = tactex::uniform(rng, 50.0, 80.0);
    const double radius = tactex::uniform(rng, 12.0, 70.0);
    const auto s = tt::press(h, tt::random_pose(rng()), gel, tt::kDefaultMaxDepthMm, rng(), radius);
    const auto a = tt::detect_contact(s.frames, s.reference, collection);
    const auto b = tt::detect_contact(s.frames, s.reference, pretrain);
    if (a && (!b || *a <= *b)) ++earlier_or_equal;
    // once a gate fires every later frame satisfies it too
    const auto scan = tt::scan_stream(s.frames, s.reference);
    for (const auto& [crit, idx] : {std::pair{collection, a}, std::pair{pretrain, b}}) {
      for (std::size_t k = 0; k < s.frames.size(); ++k) {
        const bool sat = tt::satisfies(crit, scan.ssim[k], scan.marker_displacement[k]);
        if (sat != (idx && k >= *idx)) {
          ++violations;
          break;
        }
      }
    }
  }
  const double share = static_cast<double>(earlier_or_equal) / kTrials;
  return {share >= kGateShare && violations == 0, "collection gate at or before pretrain gate in " +
                                                      std::to_string(earlier_or_equal) + "/" + std::to_string(kTrials) +
                                                      " presses; " + std::to_string(violations) + " monotonicity violations"};
}

// ---- 8. scenario harness -----------------------------------------------------------

pl::ObjectOutcome outcome(bool ok) {
  pl::ObjectOutcome o;
  o.label = "fruit";
  o.grounded = o.localized = o.measured = o.communicated = ok;
  return o;
}

Outcome scenario_harness(const nn::HardnessModel& model) {
  std::string detail;
  bool pass = true;
  // five targets, one not found: 4/5 objects succeed, the scene-level run does not
  pl::RunRecord worked;
  for (int i = 0; i < 5; ++i) worked.objects.push_back(outcome(i != 2));
  worked.judge = {5, 5, 5};
  const auto w = pl::summarize_runs(4, {worked});
  if (std::abs(w.ol_sr - 0.8) > 1e-12 || w.sl_sr != 0.0) pass = false;
  detail += "worked example OL " + fmt(w.ol_sr) + " SL " + fmt(w.sl_sr);

  pl::PipelineConfig noiseless;
  noiseless.detector = tactex::vision::perfect_profile();
  noiseless.depth_noise_sigma = 0.0;
  const auto sc1 = pl::run_scenario(pl::scenario_spec(1), 10, model, noiseless, 42);
  if (sc1.records.size() != 10 || sc1.report.sl_sr != 1.0) pass = false;
  detail += "; zero-noise scenario 1 SL " + fmt(sc1.report.sl_sr) + " over " + std::to_string(sc1.records.size());

  Rng rng(99);
  int bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<pl::RunRecord> runs(1 + rng() % 10);
    double ol = 0;
    int sl = 0;
    for (auto& r : runs) {
      r.judge = {static_cast<int>(1 + rng() % 5), static_cast<int>(1 + rng() % 5), static_cast<int>(1 + rng() % 5)};
      const int n = static_cast<int>(1 + rng() % 5);
      int ok = 0;
      for (int i = 0; i < n; ++i) {
        const bool good = tactex::uniform(rng, 0.0, 1.0) < 0.8;
        r.objects.push_back(outcome(good));
        ok += good;
      }
      ol += static_cast<double>(ok) / n;
      sl += ok == n && r.judge.accuracy >= 4 && r.judge.completeness == 5;
    }
    const auto rep = pl::summarize_runs(1 + trial % 4, runs);
    const double n = static_cast<double>(runs.size());
    if (rep.sl_sr > rep.ol_sr + 1e-12 || std::abs(rep.ol_sr - ol / n) > 1e-12 || std::abs(rep.sl_sr - sl / n) > 1e-12)
      ++bad;
  }
  if (bad) pass = false;
  detail += "; " + std::to_string(100 - bad) + "/100 random reports consistent with SL <= OL";
  return {pass, detail};
}

// ---- 9. reproducibility ---------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome reproducibility(const std::string& cli, const fs::path& checkpoint, const fs::path& out) {
  if (cli.empty() || !fs::exists(cli)) return {false, "CLI binary not found: " + cli};
  std::vector<std::string> reports;
  for (const char* run : {"repro_a", "repro_b"}) {
    const auto dir = out / run;
    fs::remove_all(dir);
    const std::string cmd = "\"" + cli + "\" --seed 42 --out \"" + dir.string() + "\" run-scenarios --checkpoint \"" +
                            checkpoint.string() + "\" 2>\"" + (out / (std::string(run) + ".log")).string() + "\"";
    if (std::system(cmd.c_str()) != 0) return {false, "run-scenarios failed; see " + std::string(run) + ".log"};
    reports.push_back(slurp(dir / "scenarios.json"));
  }
  const bool pass = !reports[0].empty() && reports[0] == reports[1];
  return {pass, "two run-scenarios --seed 42 reports of " + std::to_string(reports[0].size()) + " bytes " +
                    (pass ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string out_dir = "acceptance_artifacts", cli, checkpoint;
  std::vector<int> only;
  app.add_option("--out", out_dir, "Artifact directory");
  app.add_option("--cli", cli, "Path to the tactex binary");
  app.add_option("--checkpoint", checkpoint, "Reuse a trained checkpoint for 4, 8 and 9 when 3 is skipped");
  app.add_option("--only", only, "Criteria to run (1-9)");
  CLI11_PARSE(app, argc, argv);
  const fs::path out(out_dir);
  fs::create_directories(out);
  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int id) { return selected.empty() || selected.count(id); };

  Trained trained;
  if (!checkpoint.empty()) {
    trained.model = nn::load_checkpoint(checkpoint);
    trained.checkpoint = checkpoint;
  }
  auto needs_model = [&](auto f) {
    return [&trained, f]() -> Outcome {
      if (!trained.model) return {false, "no trained model (criterion 3 failed or skipped)"};
      return f(*trained.model);
    };
  };

  const std::vector<std::tuple<int, std::string, std::function<Outcome()>>> criteria{
      {1, "gradient correctness", gradient_correctness},
      {2, "loss exactness", loss_exactness},
      {3, "training pipeline", [&] { return training(out, trained); }},
      {4, "ranking significance", needs_model([&](const nn::HardnessModel& m) { return ranking(m, out); })},
      {5, "statistics oracles", stats_oracles},
      {6, "servoing geometry", [&] { return servoing(out); }},
      {7, "contact gating", contact_gating},
      {8, "scenario harness", needs_model([](const nn::HardnessModel& m) { return scenario_harness(m); })},
      {9, "reproducibility",
       needs_model([&](const nn::HardnessModel&) { return reproducibility(cli, trained.checkpoint, out); })},
  };

  int failed = 0;
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& [id, name, fn] : criteria) {
    if (!wanted(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << o.detail << std::endl;
    summary.push_back({{"id", id}, {"name", name}, {"pass", o.pass}, {"detail", o.detail},
                       {"seconds", seconds_since(t0)}});
  }
  write_json(out / "acceptance.json", summary);
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << std::endl;
  return failed ? 1 : 0;
}
