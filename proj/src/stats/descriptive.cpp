#include "tactex/stats/descriptive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tactex/stats/distributions.hpp"

namespace tactex::stats {
namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, std::size_t min_n) {
  if (a.size() != b.size()) throw StatsError("inputs must have equal length");
  if (a.size() < min_n) throw StatsError("not enough observations");
}

}  // namespace

double mean(std::span<const double> x) {
  if (x.empty()) throw StatsError("mean of empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x, int ddof) {
  if (x.size() <= static_cast<std::size_t>(ddof)) throw StatsError("variance: not enough observations");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - ddof);
}

double quantile(std::span<const double> x, double q) {
  if (x.empty()) throw StatsError("quantile of empty sample");
  if (q < 0.0 || q > 1.0) throw StatsError("quantile level outside [0, 1]");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[hi] - s[lo]);
}

double median(std::span<const double> x) { return quantile(x, 0.5); }

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double rmse(std::span<const double> predictions, std::span<const double> labels) {
  require_same_length(predictions, labels, 1);
  double ss = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double d = predictions[i] - labels[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(labels.size()));
}

double r2(std::span<const double> predictions, std::span<const double> labels) {
  require_same_length(predictions, labels, 2);
  const double m = mean(labels);
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ss_res += (labels[i] - predictions[i]) * (labels[i] - predictions[i]);
    ss_tot += (labels[i] - m) * (labels[i] - m);
  }
  if (ss_tot == 0.0) throw StatsError("r2: labels have zero variance");
  return 1.0 - ss_res / ss_tot;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, 2);
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw StatsError("correlation undefined for a constant input");
  return sab / std::sqrt(saa * sbb);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, 2);
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

MeanInterval mean_confidence_interval(std::span<const double> x, double level) {
  if (x.size() < 2) throw StatsError("confidence interval needs at least 2 observations");
  const double m = mean(x);
  const double se = std::sqrt(variance(x, 1) / static_cast<double>(x.size()));
  const double t = student_t_quantile(0.5 + 0.5 * level, static_cast<double>(x.size() - 1));
  return {m, m - t * se, m + t * se};
}

}  // namespace tactex::stats
