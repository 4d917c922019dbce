#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace biasdetect {

enum class Polarity { positive, negative, neutral };
enum class Bias { overly_positive, overly_negative, normal };

std::string_view to_string(Polarity p);
std::string_view to_string(Bias b);

/// How per-post scores collapse into one attitude value.
enum class AttitudeMode {
  sum,   ///< plain sum of scores (default)
  mean,  ///< sum divided by the number of posts
};

struct AttitudeRecord {
  std::string user_id;
  double attitude = 0.0;
  Polarity polarity = Polarity::neutral;
  Bias bias = Bias::normal;
};

struct DistributionStats {
  double mean = 0.0;
  double std_dev = 0.0;  ///< population form (divisor N)
  double k = 3.0;
  std::size_t n_users = 0;

  double upper() const { return mean + k * std_dev; }
  double lower() const { return mean - k * std_dev; }
};

struct HistogramBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;

  bool operator==(const HistogramBin&) const = default;
};

/// Sum of scores; an empty list gives 0.
double aggregate_attitude(std::span<const double> scores, AttitudeMode mode = AttitudeMode::sum);

Polarity classify_polarity(double attitude);

/// Mean and population standard deviation. Throws Error("no users") on empty
/// input and Error on k <= 0.
DistributionStats fit_stats(std::span<const double> attitudes, double k = 3.0);

/// Overly positive when a >= mu + k*sigma, overly negative when
/// a <= mu - k*sigma, normal otherwise. With sigma = 0 a value equal to the
/// mean lands on the upper boundary and is labeled overly positive.
Bias label_bias(double attitude, const DistributionStats& stats);

/// Equal-width bins over [min, max]; the maximum falls in the last bin.
/// A zero range uses width 1 starting at the minimum.
std::vector<HistogramBin> histogram(std::span<const double> attitudes, std::size_t n_bins);

}  // namespace biasdetect
