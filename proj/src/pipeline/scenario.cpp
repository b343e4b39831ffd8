#include "tactex/pipeline/scenario.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "tactex/common/rng.hpp"

namespace tactex::pipeline {
namespace {

constexpr lang::Property kPropertyCycle[] = {lang::Property::hardness, lang::Property::ripeness,
                                             lang::Property::softness};

std::string noun(lang::Property p) {
  switch (p) {
    case lang::Property::hardness: return "hardness";
    case lang::Property::softness: return "softness";
    case lang::Property::ripeness: return "ripeness";
  }
  return "";
}

std::string adjective(lang::Property p) {
  switch (p) {
    case lang::Property::hardness: return "hard";
    case lang::Property::softness: return "soft";
    case lang::Property::ripeness: return "ripe";
  }
  return "";
}

int distinct_for_run(const ScenarioSpec& spec, int run) {
  const int span = spec.distinct_max - spec.distinct_min + 1;
  return spec.distinct_min + run % span;
}

void replace_first(std::string& s, const std::string& what, const std::string& with) {
  const auto pos = s.find(what);
  if (pos == std::string::npos) throw std::logic_error("template has no " + what);
  s.replace(pos, what.size(), with);
}

}  // namespace

const std::vector<ScenarioSpec>& scenario_table() {
  static const std::vector<ScenarioSpec> table{
      {1, "Identify the [property] of [object].", 1, 1, 1, true, "Low"},
      {2, "Identify the most [property] [object] in the scene.", 2, 1, 1, true, "Medium"},
      {3, "Summarize the [property] of the [object], [object] and [object].", 3, 3, 3, true, "Med-High"},
      {4, "Summarize the [property] of all fruits in the scene.", 5, 3, 5, false, "High"},
  };
  return table;
}

const ScenarioSpec& scenario_spec(int id) {
  const auto& t = scenario_table();
  if (id < 1 || id > static_cast<int>(t.size())) throw std::out_of_range("scenario id must be 1..4");
  return t[static_cast<std::size_t>(id - 1)];
}

std::string fill_template(const ScenarioSpec& spec, lang::Property property, const std::vector<std::string>& classes) {
  std::string s = spec.prompt_template;
  // the superlative tier takes the adjective ("most ripe"), the others the noun
  replace_first(s, "[property]", spec.id == 2 ? adjective(property) : noun(property));
  if (spec.explicit_targets) {
    for (const auto& c : classes) replace_first(s, "[object]", c);
  }
  if (s.find('[') != std::string::npos) throw std::invalid_argument("scenario template left unfilled");
  return s;
}

ScenarioInstance make_instance(const ScenarioSpec& spec, int run_index, std::uint64_t seed,
                               const std::vector<std::string>& classes) {
  if (run_index < 0) throw std::invalid_argument("run index must be >= 0");
  if (static_cast<int>(classes.size()) < spec.distinct_max)
    throw std::invalid_argument("not enough classes for scenario " + std::to_string(spec.id));

  std::vector<std::string> perm = classes;
  Rng perm_rng(derive_seed(seed, 7000 + static_cast<std::uint64_t>(spec.id)));
  std::shuffle(perm.begin(), perm.end(), perm_rng);

  int offset = 0;
  for (int r = 0; r < run_index; ++r) offset += distinct_for_run(spec, r);
  const int d = distinct_for_run(spec, run_index);
  std::vector<std::string> distinct;
  for (int j = 0; j < d; ++j) distinct.push_back(perm[static_cast<std::size_t>(offset + j) % perm.size()]);

  ScenarioInstance inst;
  inst.scenario_id = spec.id;
  inst.run_index = run_index;
  inst.seed = derive_seed(seed, static_cast<std::uint64_t>(spec.id) * 1000 + static_cast<std::uint64_t>(run_index));
  inst.property = kPropertyCycle[run_index % 3];
  inst.labels = distinct;
  Rng fill_rng(derive_seed(inst.seed, 1));
  while (static_cast<int>(inst.labels.size()) < spec.n_objects) {
    std::uniform_int_distribution<std::size_t> pick(0, distinct.size() - 1);
    inst.labels.push_back(distinct[pick(fill_rng)]);
  }
  inst.scene = scene::generate_scene_with_labels(derive_seed(inst.seed, 2), inst.labels);
  inst.query = fill_template(spec, inst.property, distinct);
  return inst;
}

SuccessReport summarize_runs(int scenario_id, const std::vector<RunRecord>& records,
                             const std::set<std::string>& exclude) {
  SuccessReport rep;
  rep.scenario_id = scenario_id;
  rep.excluded = exclude;
  double ol = 0.0;
  std::map<Stage, double> latency;
  double total = 0.0;
  for (const auto& r : records) {
    const bool involves_excluded = std::any_of(r.objects.begin(), r.objects.end(),
                                               [&](const ObjectOutcome& o) { return exclude.count(o.label) > 0; });
    if (involves_excluded) continue;
    ++rep.runs;
    ol += r.object_success_rate();
    if (!r.scenario_success()) continue;
    ++rep.succeeded_runs;
    for (const auto& t : r.timings) latency[t.stage] += t.duration_ms;
    total += r.total_ms;
  }
  if (rep.runs > 0) {
    rep.ol_sr = ol / rep.runs;
    rep.sl_sr = static_cast<double>(rep.succeeded_runs) / rep.runs;
  }
  if (rep.succeeded_runs > 0) {
    for (auto& [stage, sum] : latency) rep.mean_latency_ms[stage] = sum / rep.succeeded_runs;
    rep.mean_total_ms = total / rep.succeeded_runs;
  }
  return rep;
}

ScenarioResult run_scenario(const ScenarioSpec& spec, int runs, const neuro::HardnessModel& model,
                            const PipelineConfig& config, std::uint64_t seed) {
  if (runs < 0) throw std::invalid_argument("runs must be >= 0");
  ScenarioResult out;
  out.spec = spec;
  for (int r = 0; r < runs; ++r) {
    const auto inst = make_instance(spec, r, seed);
    auto rec = run_query(inst.scene, inst.query, model, config, derive_seed(inst.seed, 3));
    rec.scenario_id = spec.id;
    out.records.push_back(std::move(rec));
  }
  out.report = summarize_runs(spec.id, out.records);
  return out;
}

nlohmann::json to_json(const ScenarioSpec& s) {
  return {{"id", s.id},
          {"prompt_template", s.prompt_template},
          {"n_objects", s.n_objects},
          {"n_distinct", s.distinct_min == s.distinct_max
                             ? nlohmann::json(s.distinct_min)
                             : nlohmann::json{s.distinct_min, s.distinct_max}},
          {"explicit", s.explicit_targets},
          {"complexity", s.complexity}};
}

nlohmann::json to_json(const SuccessReport& r, bool include_latency) {
  nlohmann::json j{{"scenario_id", r.scenario_id},
                   {"runs", r.runs},
                   {"succeeded_runs", r.succeeded_runs},
                   {"ol_sr", r.ol_sr},
                   {"sl_sr", r.sl_sr},
                   {"excluded", r.excluded}};
  if (include_latency) {
    nlohmann::json lat = nlohmann::json::object();
    for (const auto& [stage, ms] : r.mean_latency_ms) lat[to_string(stage)] = ms;
    j["mean_latency_ms"] = lat;
    j["mean_total_ms"] = r.mean_total_ms;
  }
  return j;
}

nlohmann::json to_json(const ScenarioResult& result, bool include_latency) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : result.records) runs.push_back(to_json(r, include_latency));
  return {{"scenario", to_json(result.spec)}, {"summary", to_json(result.report, include_latency)}, {"runs", runs}};
}

}  // namespace tactex::pipeline
