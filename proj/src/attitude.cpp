#include "biasdetect/attitude.hpp"

#include <algorithm>
#include <cmath>

#include "biasdetect/error.hpp"

namespace biasdetect {

std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::positive: return "positive";
    case Polarity::negative: return "negative";
    case Polarity::neutral: return "neutral";
  }
  return "neutral";
}

std::string_view to_string(Bias b) {
  switch (b) {
    case Bias::overly_positive: return "overly_positive";
    case Bias::overly_negative: return "overly_negative";
    case Bias::normal: return "normal";
  }
  return "normal";
}

double aggregate_attitude(std::span<const double> scores, AttitudeMode mode) {
  double sum = 0.0;
  for (double s : scores) sum += s;
  if (mode == AttitudeMode::mean && !scores.empty()) sum /= static_cast<double>(scores.size());
  return sum;
}

Polarity classify_polarity(double attitude) {
  if (attitude > 0) return Polarity::positive;
  if (attitude < 0) return Polarity::negative;
  return Polarity::neutral;
}

DistributionStats fit_stats(std::span<const double> attitudes, double k) {
  if (attitudes.empty()) throw Error("no users");
  if (!(k > 0)) throw Error("sigma multiplier k must be positive");
  const double n = static_cast<double>(attitudes.size());
  double sum = 0.0;
  for (double a : attitudes) sum += a;
  const double mean = sum / n;
  double ss = 0.0;
  for (double a : attitudes) ss += (a - mean) * (a - mean);
  return DistributionStats{mean, std::sqrt(ss / n), k, attitudes.size()};
}

Bias label_bias(double attitude, const DistributionStats& stats) {
  if (attitude >= stats.upper()) return Bias::overly_positive;
  if (attitude <= stats.lower()) return Bias::overly_negative;
  return Bias::normal;
}

std::vector<HistogramBin> histogram(std::span<const double> attitudes, std::size_t n_bins) {
  if (attitudes.empty()) throw Error("histogram of an empty list");
  if (n_bins == 0) throw Error("histogram needs at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(attitudes.begin(), attitudes.end());
  const double lo = *lo_it;
  const double top = *hi_it > lo ? *hi_it : lo + 1.0;
  const double range = *hi_it > lo ? *hi_it - lo : 1.0;
  const double width = range / static_cast<double>(n_bins);

  std::vector<HistogramBin> bins(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    bins[i].low = lo + width * static_cast<double>(i);
    bins[i].high = i + 1 == n_bins ? top : lo + width * static_cast<double>(i + 1);
  }
  for (double a : attitudes) {
    auto idx = static_cast<std::size_t>(std::floor((a - lo) / width));
    bins[std::min(idx, n_bins - 1)].count += 1;
  }
  return bins;
}

}  // namespace biasdetect
