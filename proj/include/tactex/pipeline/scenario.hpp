#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tactex/pipeline/run.hpp"

namespace tactex::pipeline {

struct ScenarioSpec {
  int id = 1;
  std::string prompt_template;
  int n_objects = 1;
  int distinct_min = 1;
  int distinct_max = 1;
  bool explicit_targets = true;
  std::string complexity;
};

/// The four interaction tiers, in order.
const std::vector<ScenarioSpec>& scenario_table();
/// Throws std::out_of_range for ids outside 1..4.
const ScenarioSpec& scenario_spec(int id);

struct ScenarioInstance {
  int scenario_id = 1;
  int run_index = 0;
  std::uint64_t seed = 0;
  lang::Property property = lang::Property::hardness;
  /// Scene labels, one per object.
  std::vector<std::string> labels;
  scene::Scene scene;
  std::string query;
};

/// Classes rotate through a seeded permutation of `classes` so that every
/// class appears equally often over a full cycle of runs; the property cycles
/// hardness, ripeness, softness.
ScenarioInstance make_instance(const ScenarioSpec& spec, int run_index, std::uint64_t seed,
                               const std::vector<std::string>& classes = scene::fruit_lexicon());

/// Fills the template with the property and the class names.
std::string fill_template(const ScenarioSpec& spec, lang::Property property, const std::vector<std::string>& classes);

struct SuccessReport {
  int scenario_id = 0;
  int runs = 0;
  int succeeded_runs = 0;
  double ol_sr = 0.0;
  double sl_sr = 0.0;
  /// Mean per-stage latency over succeeded runs; empty when none succeeded.
  std::map<Stage, double> mean_latency_ms;
  double mean_total_ms = 0.0;
  std::set<std::string> excluded;
};

/// OL-SR is the mean of per-run object success rates, SL-SR the fraction of
/// runs whose every target succeeded and whose text passed the judge. Runs
/// that involve an excluded class are left out.
SuccessReport summarize_runs(int scenario_id, const std::vector<RunRecord>& records,
                             const std::set<std::string>& exclude = {});

struct ScenarioResult {
  ScenarioSpec spec;
  std::vector<RunRecord> records;
  SuccessReport report;
};

ScenarioResult run_scenario(const ScenarioSpec& spec, int runs, const neuro::HardnessModel& model,
                            const PipelineConfig& config, std::uint64_t seed);

nlohmann::json to_json(const ScenarioSpec& spec);
/// Latency fields are wall-clock; leave them out for reproducible reports.
nlohmann::json to_json(const SuccessReport& report, bool include_latency);
nlohmann::json to_json(const ScenarioResult& result, bool include_latency);

}  // namespace tactex::pipeline
