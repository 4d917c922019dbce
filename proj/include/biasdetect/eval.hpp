#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "biasdetect/mlp.hpp"

namespace biasdetect {

/// 2x2 observed-by-predicted table. Index 0 is Neg (normal), 1 is Pos (biased).
struct ContingencyMatrix {
  std::array<std::array<double, 2>, 2> cells{};  ///< cells[observed][predicted]
  bool row_normalized = false;

  double tn() const { return cells[0][0]; }
  double fp() const { return cells[0][1]; }
  double fn() const { return cells[1][0]; }
  double tp() const { return cells[1][1]; }
};

/// Counts observed/predicted pairs; with `row_normalize` each observed row is
/// converted to percentages. Throws Error on length mismatch, empty input,
/// labels outside {0,1}, or an empty observed class when normalizing.
ContingencyMatrix contingency(std::span<const int> predicted, std::span<const int> observed, bool row_normalize);

/// (TP + TN) / (TP + TN + FP + FN) * 100, applied to whatever the cells hold.
/// On row-normalized cells this is the mean per-class recall. Throws Error
/// for an all-zero matrix.
double accuracy(const ContingencyMatrix& m);

/// Generalized weights: d log(o / (1 - o)) / d x_i for every observation
/// (rows) and input feature (columns), by backpropagation through the
/// output log-odds.
std::vector<std::vector<double>> generalized_weights(const Network& net, std::span<const std::vector<double>> inputs);

std::vector<std::vector<double>> generalized_weights(const Network& net, std::span<const FeatureVector> features);

struct GwSummary {
  std::string feature;
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

/// Per-feature min / median / max of a generalized-weight table.
std::vector<GwSummary> summarize_gw(const std::vector<std::vector<double>>& gw, std::span<const std::string> names);

}  // namespace biasdetect
