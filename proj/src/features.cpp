#include "biasdetect/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "biasdetect/error.hpp"

namespace biasdetect {

FeatureVector extract_features(const UserRecord& user, const AttitudeRecord& attitude,
                               Instant dataset_end, FeatureTally* tally) {
  FeatureVector v;
  v.user_id = user.user_id;
  v.nr = user.post_count;
  v.nfr = user.friends_count;
  v.nfo = user.followers_count;
  v.s_score = attitude.attitude;
  v.bias = attitude.bias;
  v.label = attitude.bias == Bias::normal ? 0 : 1;

  const auto anchor = user.created_at ? user.created_at : user.first_post_at;
  if (!anchor) {
    if (tally) ++tally->no_anchor;
    v.li = 0.0;
  } else {
    v.li = days_between(*anchor, dataset_end);
    if (v.li < 0) {
      if (tally) ++tally->anchor_after_end;
      v.li = 0.0;
    }
  }
  return v;
}

std::vector<double> min_max_normalize(std::span<const double> column) {
  if (column.empty()) throw Error("cannot normalize an empty column");
  const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
  const double min = *lo;
  const double range = *hi - *lo;
  std::vector<double> out(column.size(), 0.0);
  if (range > 0) {
    for (std::size_t i = 0; i < column.size(); ++i) out[i] = (column[i] - min) / range;
  }
  return out;
}

std::vector<double> Normalizer::apply(std::span<const double> raw) const {
  if (raw.size() != names.size()) throw Error("normalizer: expected " + std::to_string(names.size()) + " inputs");
  std::vector<double> out(raw.size(), 0.0);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double range = max[i] - min[i];
    if (range > 0) out[i] = std::clamp((raw[i] - min[i]) / range, 0.0, 1.0);
  }
  return out;
}

std::vector<std::string> model_feature_names(std::span<const FeatureVector> vectors) {
  std::vector<std::string> names{"nr", "li", "nfr"};
  const bool followers = !vectors.empty() &&
                         std::all_of(vectors.begin(), vectors.end(), [](const auto& v) { return v.nfo.has_value(); });
  if (followers) names.push_back("nfo");
  return names;
}

namespace {

double feature_value(const FeatureVector& v, std::string_view name) {
  if (name == "nr") return static_cast<double>(v.nr);
  if (name == "li") return v.li;
  if (name == "nfr") return static_cast<double>(v.nfr);
  if (name == "nfo") {
    if (!v.nfo) throw Error("user " + v.user_id + " has no follower count");
    return static_cast<double>(*v.nfo);
  }
  if (name == "s_score") return v.s_score;
  throw Error("unknown feature '" + std::string(name) + "'");
}

std::vector<double> column(std::span<const FeatureVector> vectors, std::string_view name) {
  std::vector<double> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) out.push_back(feature_value(v, name));
  return out;
}

}  // namespace

std::vector<double> raw_inputs(const FeatureVector& v, std::span<const std::string> names) {
  std::vector<double> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(feature_value(v, n));
  return out;
}

Normalizer normalize_features(std::span<FeatureVector> vectors) {
  Normalizer norm;
  norm.names = model_feature_names(vectors);
  if (vectors.empty()) return norm;
  for (const auto& name : norm.names) {
    const auto col = column(vectors, name);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    norm.min.push_back(*lo);
    norm.max.push_back(*hi);
  }
  for (auto& v : vectors) v.normalized = norm.apply(raw_inputs(v, norm.names));
  return norm;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("correlation: length mismatch");
  if (x.size() < 2) throw Error("correlation: need at least two observations");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelation("undefined correlation: constant column");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("correlation: length mismatch");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

std::string_view to_string(CorrelationMethod m) {
  return m == CorrelationMethod::pearson ? "pearson" : "spearman";
}

std::string_view to_string(Subset s) {
  switch (s) {
    case Subset::all: return "all";
    case Subset::overly_positive: return "overly_positive";
    case Subset::overly_negative: return "overly_negative";
    case Subset::above_mean: return "above_mean";
    case Subset::below_mean: return "below_mean";
  }
  return "all";
}

CorrelationMethod parse_method(std::string_view name) {
  if (name == "pearson") return CorrelationMethod::pearson;
  if (name == "spearman") return CorrelationMethod::spearman;
  throw Error("unknown correlation method '" + std::string(name) + "'");
}

Subset parse_subset(std::string_view name) {
  for (auto s : {Subset::all, Subset::overly_positive, Subset::overly_negative, Subset::above_mean,
                 Subset::below_mean}) {
    if (to_string(s) == name) return s;
  }
  throw Error("unknown subset '" + std::string(name) + "'");
}

std::vector<FeatureVector> select_subset(std::span<const FeatureVector> vectors, Subset subset) {
  double mean = 0.0;
  if (!vectors.empty()) {
    for (const auto& v : vectors) mean += v.s_score;
    mean /= static_cast<double>(vectors.size());
  }
  std::vector<FeatureVector> out;
  for (const auto& v : vectors) {
    bool keep = false;
    switch (subset) {
      case Subset::all: keep = true; break;
      case Subset::overly_positive: keep = v.bias == Bias::overly_positive; break;
      case Subset::overly_negative: keep = v.bias == Bias::overly_negative; break;
      case Subset::above_mean: keep = v.s_score > mean; break;
      case Subset::below_mean: keep = v.s_score < mean; break;
    }
    if (keep) out.push_back(v);
  }
  return out;
}

CorrelationMatrix correlation_matrix(std::span<const FeatureVector> vectors, CorrelationMethod method,
                                     Subset subset) {
  const auto chosen = select_subset(vectors, subset);
  const std::string label(to_string(subset));
  if (chosen.size() < 2) {
    throw Error("subset '" + label + "' has " + std::to_string(chosen.size()) +
                " users; correlation needs at least 2");
  }
  CorrelationMatrix m;
  m.method = method;
  m.n_users = chosen.size();
  m.names = model_feature_names(chosen);
  m.names.push_back("s_score");

  std::vector<std::vector<double>> cols;
  for (const auto& name : m.names) {
    auto col = column(chosen, name);
    if (method == CorrelationMethod::spearman) col = average_ranks(col);
    cols.push_back(std::move(col));
  }
  const std::size_t k = m.names.size();
  m.values.assign(k * k, std::nullopt);
  bool any_defined = false;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      try {
        const double r = i == j ? (pearson(cols[i], cols[i]), 1.0) : pearson(cols[i], cols[j]);
        m.values[i * k + j] = r;
        m.values[j * k + i] = r;
        if (i != j) any_defined = true;
      } catch (const UndefinedCorrelation&) {
      }
    }
  }
  if (!any_defined) {
    throw Error("subset '" + label + "': every correlation is undefined (constant columns)");
  }
  return m;
}

}  // namespace biasdetect
