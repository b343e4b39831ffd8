#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tactex::stats {

enum class Alternative { two_sided, greater, less };
enum class TestMethod { exact, normal_approx, student_t };

std::string to_string(Alternative alternative);
std::string to_string(TestMethod method);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  TestMethod method = TestMethod::student_t;
  Alternative alternative = Alternative::two_sided;
  /// Degrees of freedom for t tests; 0 for rank tests.
  double df = 0.0;
};

/// Welch's unequal-variance t test of mean(a) - mean(b).
TestResult welch_t(std::span<const double> a, std::span<const double> b,
                   Alternative alternative = Alternative::two_sided);

double welch_df(std::span<const double> a, std::span<const double> b);

/// One-sample t test of mean(x) against mu0.
TestResult one_sample_t(std::span<const double> x, double mu0,
                        Alternative alternative = Alternative::two_sided);

/// Totals at or below this use exact enumeration of rank assignments.
inline constexpr std::size_t kExactRankSumLimit = 12;

enum class RankSumMethod { automatic, exact, normal_approx };

/// Wilcoxon rank-sum / Mann-Whitney test. The statistic is the Mann-Whitney U
/// of `a` (rank sum of a minus n_a(n_a+1)/2). "greater" tests whether a tends
/// to exceed b. Exact p-values are conditional on the observed ties; the
/// normal approximation uses tie and continuity corrections. Two-sided exact
/// p-values are twice the smaller tail, capped at 1.
TestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                             Alternative alternative = Alternative::two_sided,
                             RankSumMethod method = RankSumMethod::automatic);

/// Holm step-down adjustment; output is in input order.
std::vector<double> holm_correct(std::span<const double> p_values);

}  // namespace tactex::stats
