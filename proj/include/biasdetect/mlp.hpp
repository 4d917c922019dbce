#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasdetect/features.hpp"

namespace biasdetect {

/// Weights and biases of one fully connected sigmoid layer.
struct LayerParams {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;  ///< inputs x outputs, row-major
  std::vector<double> biases;   ///< outputs

  LayerParams() = default;
  LayerParams(std::size_t in, std::size_t out, double fill = 0.0)
      : inputs(in), outputs(out), weights(in * out, fill), biases(out, fill) {}

  double& w(std::size_t i, std::size_t j) { return weights[i * outputs + j]; }
  double w(std::size_t i, std::size_t j) const { return weights[i * outputs + j]; }

  bool operator==(const LayerParams&) const = default;
};

/// A per-parameter quantity shaped like a network (gradients, step sizes).
using ParamSet = std::vector<LayerParams>;

struct Network {
  std::vector<std::size_t> layer_sizes;  ///< [inputs, hidden..., 1]
  ParamSet layers;
  std::uint64_t rng_seed = 0;

  std::size_t input_size() const { return layer_sizes.empty() ? 0 : layer_sizes.front(); }
  std::size_t parameter_count() const;

  bool operator==(const Network&) const = default;
};

/// Every parameter of `set` in a fixed order: layer by layer, weights then biases.
std::vector<std::span<double>> parameter_spans(ParamSet& set);
std::vector<std::span<const double>> parameter_spans(const ParamSet& set);

/// Zero-filled set with the same shapes as `like`.
ParamSet zeros_like(const ParamSet& like, double fill = 0.0);

struct RpropParams {
  double eta_plus = 1.2;
  double eta_minus = 0.5;
  double delta_zero = 0.1;
  double delta_max = 50.0;
  double delta_min = 1e-6;
};

struct TrainConfig {
  std::vector<std::size_t> hidden{4, 2};
  /// Stop once every |dE/dtheta| falls below this.
  double threshold = 0.01;
  std::size_t max_epochs = 20000;
  /// Independent restarts; the lowest final SSE wins.
  std::size_t rep = 1;
  RpropParams rprop;
  double init_scale = 1.0;
  std::uint64_t seed = 1;
  double class_threshold = 0.5;

  /// Throws Error when the rprop constants or epoch count are inconsistent.
  void validate() const;

  static TrainConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Step sizes, last gradient (zeroed after a sign change) and last applied
/// change of every parameter.
struct RpropState {
  ParamSet step;
  ParamSet prev_grad;
  ParamSet prev_change;

  static RpropState initial(const Network& net, const RpropParams& params);
};

enum class StopReason { threshold, max_epochs };
std::string_view to_string(StopReason r);

struct TrainHistory {
  std::vector<double> sse;  ///< one entry per epoch, before that epoch's update
  std::size_t epochs_run = 0;
  StopReason stop_reason = StopReason::max_epochs;

  bool operator==(const TrainHistory&) const = default;
};

struct Example {
  std::vector<double> x;
  double target = 0.0;
};

struct ForwardPass {
  double output = 0.0;
  /// activations[0] is the input; activations[l + 1] is layer l's output.
  std::vector<std::vector<double>> activations;
};

struct Prediction {
  double probability = 0.0;
  int label = 0;
};

struct TrainResult {
  Network network;
  TrainHistory history;
  /// Final SSE of every restart, in restart order.
  std::vector<double> restart_sse;
};

double sigmoid(double z);

/// Weights and biases uniform in [-init_scale, init_scale] from a seeded stream.
/// Throws Error when any layer size is zero or the output layer is not 1.
Network init_network(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed, double init_scale);

ForwardPass forward(const Network& net, std::span<const double> x);

/// Half the summed squared error over all observations.
double sse(std::span<const double> outputs, std::span<const double> targets);

/// Exact full-batch gradient of SSE with respect to every parameter.
ParamSet gradient(const Network& net, std::span<const Example> batch);

/// Same, also returning the batch SSE at the current parameters.
ParamSet gradient(const Network& net, std::span<const Example> batch, double& loss);

/// One rprop+ update with weight backtracking. `prev_loss` is the SSE before
/// the previous update (use +inf on the first step); `cur_loss` the SSE at
/// the current parameters.
void rprop_plus_step(Network& net, RpropState& state, const ParamSet& grad, double prev_loss, double cur_loss,
                     const RpropParams& params);

/// Full-batch rprop+ on one starting network.
TrainResult train_from(Network start, std::span<const Example> examples, const TrainConfig& cfg);

/// Full-batch rprop+ with `rep` seeded restarts. Throws Error("degenerate
/// target") unless both classes are present among at least two examples.
TrainResult train(std::span<const Example> examples, const TrainConfig& cfg);

/// Trains on the `normalized` inputs and `label` targets.
TrainResult train(std::span<const FeatureVector> features, const TrainConfig& cfg);

Prediction predict(const Network& net, std::span<const double> x, double class_threshold = 0.5);

std::vector<Example> to_examples(std::span<const FeatureVector> features);

/// Seeded stratified split: each class contributes round(test_ratio * size)
/// members to the test side. Returns (train, test) index lists.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(std::span<const int> labels,
                                                                                double test_ratio,
                                                                                std::uint64_t seed);

/// Keeps every minority-class index and an equal-size seeded sample of the
/// majority class. Output indices are sorted.
std::vector<std::size_t> undersample_majority(std::span<const std::size_t> indices, std::span<const int> labels,
                                              std::uint64_t seed);

/// Picks hidden sizes by balanced accuracy on a stratified validation split
/// of `examples`. Ties keep the earlier candidate.
std::vector<std::size_t> select_hidden(std::span<const Example> examples,
                                       const std::vector<std::vector<std::size_t>>& candidates,
                                       const TrainConfig& cfg, double validation_ratio = 0.25);

/// A trained network with everything needed to score raw feature rows.
struct Model {
  static constexpr int kFormatVersion = 1;

  Network network;
  Normalizer normalizer;  ///< names double as the model's feature names
  double class_threshold = 0.5;

  nlohmann::json to_json() const;
  /// Throws Error on an unknown version or malformed document.
  static Model from_json(const nlohmann::json& j);

  void save(const std::filesystem::path& path) const;
  /// Throws Error when the stored feature names differ from `expected_features`.
  static Model load(const std::filesystem::path& path, std::span<const std::string> expected_features);
};

}  // namespace biasdetect
