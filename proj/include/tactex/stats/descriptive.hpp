#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace tactex::stats {

class StatsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double mean(std::span<const double> x);
/// ddof = 0 gives the population variance, ddof = 1 the sample variance.
double variance(std::span<const double> x, int ddof = 1);
double median(std::span<const double> x);
/// Linear-interpolation quantile (the "type 7" definition), q in [0, 1].
double quantile(std::span<const double> x, double q);

/// 1-based ranks; tied values share the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> x);

double rmse(std::span<const double> predictions, std::span<const double> labels);
/// 1 - SS_res / SS_tot. Throws when the labels have zero variance.
double r2(std::span<const double> predictions, std::span<const double> labels);
double pearson(std::span<const double> a, std::span<const double> b);
/// Pearson correlation of average ranks. Throws on a constant input.
double spearman(std::span<const double> a, std::span<const double> b);

struct MeanInterval {
  double mean;
  double lower;
  double upper;
};
/// Student-t confidence interval for the mean (level e.g. 0.95).
MeanInterval mean_confidence_interval(std::span<const double> x, double level = 0.95);

}  // namespace tactex::stats
