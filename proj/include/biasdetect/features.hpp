#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biasdetect/attitude.hpp"
#include "biasdetect/ingest.hpp"

namespace biasdetect {

/// Behavioral features of one user plus the sentiment-derived target.
struct FeatureVector {
  std::string user_id;
  std::int64_t nr = 0;                ///< number of posts/reviews
  double li = 0.0;                    ///< lifespan in days
  std::int64_t nfr = 0;               ///< friends
  std::optional<std::int64_t> nfo;    ///< followers, absent for datasets without them
  double s_score = 0.0;               ///< attitude
  Bias bias = Bias::normal;
  int label = 0;                      ///< 1 when biased
  /// Min-max scaled model inputs, in feature_names() order. Filled by
  /// normalize_features().
  std::vector<double> normalized;
};

/// Extraction counters worth surfacing in a run report.
struct FeatureTally {
  std::size_t no_anchor = 0;        ///< no timestamp at all, li forced to 0
  std::size_t anchor_after_end = 0; ///< anchor later than dataset end, li clamped to 0
};

/// Builds the raw feature vector. Lifespan runs from created_at (else the
/// first post) to `dataset_end`.
FeatureVector extract_features(const UserRecord& user, const AttitudeRecord& attitude,
                               Instant dataset_end, FeatureTally* tally = nullptr);

/// (x - min) / (max - min); a constant column maps to all zeros.
std::vector<double> min_max_normalize(std::span<const double> column);

/// Per-feature range captured from a population, reusable on new data.
struct Normalizer {
  std::vector<std::string> names;
  std::vector<double> min;
  std::vector<double> max;

  /// Scales one raw row, clamping to [0, 1] for values outside the fitted range.
  std::vector<double> apply(std::span<const double> raw) const;
};

/// Model input names for a population: nr, li, nfr and nfo when every vector has it.
std::vector<std::string> model_feature_names(std::span<const FeatureVector> vectors);

/// Raw model inputs of one vector in `names` order.
std::vector<double> raw_inputs(const FeatureVector& v, std::span<const std::string> names);

/// Fits min-max ranges on `vectors` and writes each vector's `normalized` field.
Normalizer normalize_features(std::span<FeatureVector> vectors);

/// Pearson product-moment correlation. Throws UndefinedCorrelation when
/// either column is constant, Error on length mismatch or n < 2.
double pearson(std::span<const double> x, std::span<const double> y);

/// Ranks starting at 1; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

enum class CorrelationMethod { pearson, spearman };
enum class Subset { all, overly_positive, overly_negative, above_mean, below_mean };

std::string_view to_string(CorrelationMethod m);
std::string_view to_string(Subset s);
CorrelationMethod parse_method(std::string_view name);
Subset parse_subset(std::string_view name);

struct CorrelationMatrix {
  std::vector<std::string> names;
  /// Row-major; absent where the correlation is undefined.
  std::vector<std::optional<double>> values;
  CorrelationMethod method = CorrelationMethod::spearman;
  std::size_t n_users = 0;

  const std::optional<double>& at(std::size_t i, std::size_t j) const {
    return values[i * names.size() + j];
  }
};

/// Vectors belonging to a subset. above/below_mean compare s_score against
/// the mean over all of `vectors`.
std::vector<FeatureVector> select_subset(std::span<const FeatureVector> vectors, Subset subset);

/// Pairwise correlations among nr, li, nfr, nfo (when present) and s_score.
/// Throws Error naming the subset when it has fewer than two users or when
/// no off-diagonal correlation is defined.
CorrelationMatrix correlation_matrix(std::span<const FeatureVector> vectors, CorrelationMethod method,
                                     Subset subset);

}  // namespace biasdetect
