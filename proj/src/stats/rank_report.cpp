#include "tactex/stats/rank_report.hpp"

#include "tactex/stats/descriptive.hpp"

namespace tactex::stats {

RankReport build_rank_report(std::string family, const std::vector<RankGroup>& groups_hard_first) {
  RankReport report;
  report.family = std::move(family);
  for (const auto& g : groups_hard_first) {
    report.groups.push_back({g.condition, g.values.size(), median(g.values), quantile(g.values, 0.25),
                             quantile(g.values, 0.75)});
  }
  std::vector<double> raw;
  for (std::size_t i = 0; i < groups_hard_first.size(); ++i) {
    for (std::size_t j = i + 1; j < groups_hard_first.size(); ++j) {
      PairwiseComparison c;
      c.higher = groups_hard_first[i].condition;
      c.lower = groups_hard_first[j].condition;
      c.test = wilcoxon_rank_sum(groups_hard_first[i].values, groups_hard_first[j].values,
                                 Alternative::greater);
      raw.push_back(c.test.p_value);
      report.comparisons.push_back(std::move(c));
    }
  }
  const auto adjusted = holm_correct(raw);
  for (std::size_t k = 0; k < adjusted.size(); ++k) report.comparisons[k].p_adjusted = adjusted[k];
  return report;
}

nlohmann::json to_json(const RankReport& report) {
  nlohmann::json j;
  j["family"] = report.family;
  j["u_convention"] = "Mann-Whitney U of the harder (first-listed) group";
  auto& groups = j["groups"] = nlohmann::json::array();
  for (const auto& g : report.groups) {
    groups.push_back({{"condition", g.condition}, {"n", g.n}, {"median", g.median}, {"q25", g.q25}, {"q75", g.q75}});
  }
  auto& comps = j["comparisons"] = nlohmann::json::array();
  for (const auto& c : report.comparisons) {
    comps.push_back({{"condition", c.higher + " vs " + c.lower},
                     {"higher", c.higher},
                     {"lower", c.lower},
                     {"u", c.test.statistic},
                     {"p", c.test.p_value},
                     {"p_adjusted", c.p_adjusted},
                     {"method", to_string(c.test.method)},
                     {"alternative", to_string(c.test.alternative)}});
  }
  return j;
}

}  // namespace tactex::stats
