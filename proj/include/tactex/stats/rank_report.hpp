#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "tactex/stats/tests.hpp"

namespace tactex::stats {

struct GroupSummary {
  std::string condition;
  std::size_t n = 0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

struct PairwiseComparison {
  std::string higher;  ///< condition expected to be harder
  std::string lower;
  TestResult test;
  double p_adjusted = 1.0;
};

/// Per-family ranking table: group medians with IQR and one-sided rank-sum
/// tests of each ordered pair, Holm-adjusted within the family.
struct RankReport {
  std::string family;
  std::vector<GroupSummary> groups;
  std::vector<PairwiseComparison> comparisons;
};

struct RankGroup {
  std::string condition;
  std::vector<double> values;
};

/// Groups must be ordered hardest first. Every ordered pair (i < j) is tested
/// with alternative "greater" for group i, then Holm-adjusted.
RankReport build_rank_report(std::string family, const std::vector<RankGroup>& groups_hard_first);

nlohmann::json to_json(const RankReport& report);

}  // namespace tactex::stats
