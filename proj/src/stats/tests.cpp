#include "tactex/stats/tests.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tactex/stats/descriptive.hpp"
#include "tactex/stats/distributions.hpp"

namespace tactex::stats {
namespace {

double t_p_value(double t, double df, Alternative alternative) {
  switch (alternative) {
    case Alternative::greater:
      return 1.0 - student_t_cdf(t, df);
    case Alternative::less:
      return student_t_cdf(t, df);
    case Alternative::two_sided:
      break;
  }
  return std::min(1.0, 2.0 * student_t_cdf(-std::fabs(t), df));
}

double clamp_p(double p) { return std::clamp(p, 0.0, 1.0); }

// Exact null distribution of the doubled rank sum of a size-k subset, by
// dynamic programming over the pooled doubled midranks.
std::map<long, double> doubled_rank_sum_distribution(const std::vector<long>& doubled_ranks, std::size_t k) {
  // counts[j] maps doubled sum -> number of subsets of size j
  std::vector<std::map<long, double>> counts(k + 1);
  counts[0][0] = 1.0;
  for (long r : doubled_ranks) {
    for (std::size_t j = k; j >= 1; --j) {
      for (const auto& [sum, c] : counts[j - 1]) counts[j][sum + r] += c;
    }
  }
  return counts[k];
}

TestResult rank_sum_exact(const std::vector<double>& ranks, std::size_t n1, std::size_t n2,
                          Alternative alternative) {
  std::vector<long> doubled(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) doubled[i] = std::lround(2.0 * ranks[i]);
  long observed = 0;
  for (std::size_t i = 0; i < n1; ++i) observed += doubled[i];
  const auto dist = doubled_rank_sum_distribution(doubled, n1);
  double total = 0.0;
  double at_or_above = 0.0;
  double at_or_below = 0.0;
  for (const auto& [sum, c] : dist) {
    total += c;
    if (sum >= observed) at_or_above += c;
    if (sum <= observed) at_or_below += c;
  }
  const double p_greater = at_or_above / total;
  const double p_less = at_or_below / total;
  double p = 0.0;
  switch (alternative) {
    case Alternative::greater:
      p = p_greater;
      break;
    case Alternative::less:
      p = p_less;
      break;
    case Alternative::two_sided:
      p = std::min(1.0, 2.0 * std::min(p_greater, p_less));
      break;
  }
  const double n1d = static_cast<double>(n1);
  TestResult r;
  r.statistic = 0.5 * static_cast<double>(observed) - n1d * (n1d + 1.0) / 2.0;
  r.p_value = clamp_p(p);
  r.n1 = n1;
  r.n2 = n2;
  r.method = TestMethod::exact;
  r.alternative = alternative;
  return r;
}

TestResult rank_sum_normal(const std::vector<double>& pooled, const std::vector<double>& ranks,
                           std::size_t n1, std::size_t n2, Alternative alternative) {
  const double n1d = static_cast<double>(n1);
  const double n2d = static_cast<double>(n2);
  const double n = n1d + n2d;
  double r1 = 0.0;
  for (std::size_t i = 0; i < n1; ++i) r1 += ranks[i];
  const double u = r1 - n1d * (n1d + 1.0) / 2.0;
  const double mu = n1d * n2d / 2.0;

  std::map<double, std::size_t> tie_counts;
  for (double v : pooled) ++tie_counts[v];
  double tie_term = 0.0;
  for (const auto& [value, t] : tie_counts) {
    const double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  const double var = n1d * n2d / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));

  TestResult r;
  r.statistic = u;
  r.n1 = n1;
  r.n2 = n2;
  r.method = TestMethod::normal_approx;
  r.alternative = alternative;
  if (var <= 0.0) {
    r.p_value = 1.0;
    return r;
  }
  const double sd = std::sqrt(var);
  switch (alternative) {
    case Alternative::greater:
      r.p_value = 1.0 - normal_cdf((u - mu - 0.5) / sd);
      break;
    case Alternative::less:
      r.p_value = normal_cdf((u - mu + 0.5) / sd);
      break;
    case Alternative::two_sided: {
      const double z = std::max(0.0, std::fabs(u - mu) - 0.5) / sd;
      r.p_value = std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
      break;
    }
  }
  r.p_value = clamp_p(r.p_value);
  return r;
}

}  // namespace

std::string to_string(Alternative alternative) {
  switch (alternative) {
    case Alternative::greater:
      return "greater";
    case Alternative::less:
      return "less";
    case Alternative::two_sided:
      break;
  }
  return "two-sided";
}

std::string to_string(TestMethod method) {
  switch (method) {
    case TestMethod::exact:
      return "exact";
    case TestMethod::normal_approx:
      return "normal-approx";
    case TestMethod::student_t:
      break;
  }
  return "student-t";
}

double welch_df(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw StatsError("welch: each sample needs at least 2 observations");
  const double va = variance(a, 1) / static_cast<double>(a.size());
  const double vb = variance(b, 1) / static_cast<double>(b.size());
  if (va == 0.0 && vb == 0.0) throw StatsError("welch: both samples have zero variance");
  return (va + vb) * (va + vb) /
         (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
}

TestResult welch_t(std::span<const double> a, std::span<const double> b, Alternative alternative) {
  const double df = welch_df(a, b);
  const double se = std::sqrt(variance(a, 1) / static_cast<double>(a.size()) +
                              variance(b, 1) / static_cast<double>(b.size()));
  TestResult r;
  r.statistic = (mean(a) - mean(b)) / se;
  r.df = df;
  r.p_value = clamp_p(t_p_value(r.statistic, df, alternative));
  r.n1 = a.size();
  r.n2 = b.size();
  r.method = TestMethod::student_t;
  r.alternative = alternative;
  return r;
}

TestResult one_sample_t(std::span<const double> x, double mu0, Alternative alternative) {
  if (x.size() < 2) throw StatsError("one-sample t: need at least 2 observations");
  const double v = variance(x, 1);
  if (v == 0.0) throw StatsError("one-sample t: zero variance");
  const double n = static_cast<double>(x.size());
  TestResult r;
  r.statistic = (mean(x) - mu0) / std::sqrt(v / n);
  r.df = n - 1.0;
  r.p_value = clamp_p(t_p_value(r.statistic, r.df, alternative));
  r.n1 = x.size();
  r.n2 = 0;
  r.method = TestMethod::student_t;
  r.alternative = alternative;
  return r;
}

TestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b, Alternative alternative,
                             RankSumMethod method) {
  if (a.empty() || b.empty()) throw StatsError("rank-sum: empty sample");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = average_ranks(pooled);
  const bool exact = method == RankSumMethod::exact ||
                     (method == RankSumMethod::automatic && pooled.size() <= kExactRankSumLimit);
  if (exact) return rank_sum_exact(ranks, a.size(), b.size(), alternative);
  return rank_sum_normal(pooled, ranks, a.size(), b.size(), alternative);
}

std::vector<double> holm_correct(std::span<const double> p_values) {
  const std::size_t m = p_values.size();
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw StatsError("holm: p-values must lie in [0, 1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return p_values[i] < p_values[j]; });
  std::vector<double> adjusted(m);
  double running = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double scaled = std::min(1.0, static_cast<double>(m - k) * p_values[order[k]]);
    running = std::max(running, scaled);
    adjusted[order[k]] = running;
  }
  return adjusted;
}

}  // namespace tactex::stats
