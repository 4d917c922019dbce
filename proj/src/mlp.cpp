#include "biasdetect/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "biasdetect/error.hpp"
#include "biasdetect/io.hpp"
#include "biasdetect/rng.hpp"

namespace biasdetect {

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.biases.size();
  return n;
}

std::vector<std::span<double>> parameter_spans(ParamSet& set) {
  std::vector<std::span<double>> out;
  for (auto& l : set) {
    out.emplace_back(l.weights);
    out.emplace_back(l.biases);
  }
  return out;
}

std::vector<std::span<const double>> parameter_spans(const ParamSet& set) {
  std::vector<std::span<const double>> out;
  for (const auto& l : set) {
    out.emplace_back(l.weights);
    out.emplace_back(l.biases);
  }
  return out;
}

ParamSet zeros_like(const ParamSet& like, double fill) {
  ParamSet out;
  out.reserve(like.size());
  for (const auto& l : like) out.emplace_back(l.inputs, l.outputs, fill);
  return out;
}

void TrainConfig::validate() const {
  if (!(rprop.eta_plus > 1.0 && rprop.eta_minus > 0.0 && rprop.eta_minus < 1.0)) {
    throw Error("rprop: need eta_plus > 1 > eta_minus > 0");
  }
  if (!(rprop.delta_min < rprop.delta_zero && rprop.delta_zero < rprop.delta_max)) {
    throw Error("rprop: need delta_min < delta_zero < delta_max");
  }
  if (max_epochs < 1) throw Error("max_epochs must be at least 1");
  if (rep < 1) throw Error("rep must be at least 1");
  if (init_scale < 0) throw Error("init_scale must be non-negative");
  for (auto h : hidden) {
    if (h < 1) throw Error("hidden layer sizes must be at least 1");
  }
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  if (j.contains("hidden")) c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  if (j.contains("threshold")) {
    // JSON has no infinity; null or the string "inf" stand in for it.
    const auto& t = j.at("threshold");
    c.threshold = (t.is_null() || (t.is_string() && t.get<std::string>() == "inf"))
                      ? std::numeric_limits<double>::infinity()
                      : t.get<double>();
  }
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.rep = j.value("rep", c.rep);
  c.init_scale = j.value("init_scale", c.init_scale);
  c.seed = j.value("seed", c.seed);
  c.class_threshold = j.value("class_threshold", c.class_threshold);
  if (j.contains("rprop")) {
    const auto& r = j.at("rprop");
    c.rprop.eta_plus = r.value("eta_plus", c.rprop.eta_plus);
    c.rprop.eta_minus = r.value("eta_minus", c.rprop.eta_minus);
    c.rprop.delta_zero = r.value("delta_zero", c.rprop.delta_zero);
    c.rprop.delta_max = r.value("delta_max", c.rprop.delta_max);
    c.rprop.delta_min = r.value("delta_min", c.rprop.delta_min);
  }
  c.validate();
  return c;
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j;
  j["hidden"] = hidden;
  j["threshold"] = std::isinf(threshold) ? nlohmann::json("inf") : nlohmann::json(threshold);
  j["max_epochs"] = max_epochs;
  j["rep"] = rep;
  j["init_scale"] = init_scale;
  j["seed"] = seed;
  j["class_threshold"] = class_threshold;
  j["rprop"] = {{"eta_plus", rprop.eta_plus},
                {"eta_minus", rprop.eta_minus},
                {"delta_zero", rprop.delta_zero},
                {"delta_max", rprop.delta_max},
                {"delta_min", rprop.delta_min}};
  return j;
}

RpropState RpropState::initial(const Network& net, const RpropParams& params) {
  return RpropState{zeros_like(net.layers, params.delta_zero), zeros_like(net.layers), zeros_like(net.layers)};
}

std::string_view to_string(StopReason r) { return r == StopReason::threshold ? "threshold" : "max_epochs"; }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Network init_network(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed, double init_scale) {
  if (layer_sizes.size() < 2) throw Error("a network needs an input and an output layer");
  for (auto s : layer_sizes) {
    if (s < 1) throw Error("layer sizes must be at least 1");
  }
  if (layer_sizes.back() != 1) throw Error("the output layer must have exactly one unit");
  Network net;
  net.layer_sizes = layer_sizes;
  net.rng_seed = seed;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    LayerParams layer(layer_sizes[l], layer_sizes[l + 1]);
    for (auto& w : layer.weights) w = rng.uniform(-init_scale, init_scale);
    for (auto& b : layer.biases) b = rng.uniform(-init_scale, init_scale);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

ForwardPass forward(const Network& net, std::span<const double> x) {
  if (x.size() != net.input_size()) {
    throw Error("input has " + std::to_string(x.size()) + " features, network expects " +
                std::to_string(net.input_size()));
  }
  ForwardPass pass;
  pass.activations.reserve(net.layers.size() + 1);
  pass.activations.emplace_back(x.begin(), x.end());
  for (const auto& layer : net.layers) {
    const auto& in = pass.activations.back();
    std::vector<double> out(layer.biases);
    for (std::size_t i = 0; i < layer.inputs; ++i) {
      const double a = in[i];
      for (std::size_t j = 0; j < layer.outputs; ++j) out[j] += a * layer.w(i, j);
    }
    for (auto& v : out) v = sigmoid(v);
    pass.activations.push_back(std::move(out));
  }
  pass.output = pass.activations.back().front();
  return pass;
}

double sse(std::span<const double> outputs, std::span<const double> targets) {
  if (outputs.size() != targets.size()) throw Error("sse: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const double d = outputs[i] - targets[i];
    total += d * d;
  }
  return 0.5 * total;
}

ParamSet gradient(const Network& net, std::span<const Example> batch, double& loss) {
  if (batch.empty()) throw Error("gradient of an empty batch");
  ParamSet grad = zeros_like(net.layers);
  loss = 0.0;
  std::vector<double> delta;
  std::vector<double> upstream;
  for (const auto& ex : batch) {
    const auto pass = forward(net, ex.x);
    const double err = pass.output - ex.target;
    loss += 0.5 * err * err;
    delta.assign(1, err * pass.output * (1.0 - pass.output));
    for (std::size_t l = net.layers.size(); l-- > 0;) {
      const auto& layer = net.layers[l];
      const auto& in = pass.activations[l];
      auto& g = grad[l];
      for (std::size_t j = 0; j < layer.outputs; ++j) g.biases[j] += delta[j];
      for (std::size_t i = 0; i < layer.inputs; ++i) {
        for (std::size_t j = 0; j < layer.outputs; ++j) g.w(i, j) += in[i] * delta[j];
      }
      if (l == 0) break;
      upstream.assign(layer.inputs, 0.0);
      for (std::size_t i = 0; i < layer.inputs; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < layer.outputs; ++j) s += layer.w(i, j) * delta[j];
        upstream[i] = s * in[i] * (1.0 - in[i]);
      }
      delta.swap(upstream);
    }
  }
  return grad;
}

ParamSet gradient(const Network& net, std::span<const Example> batch) {
  double loss = 0.0;
  return gradient(net, batch, loss);
}

namespace {

int sign_of(double v) { return (v > 0) - (v < 0); }

double max_abs(const ParamSet& set) {
  double m = 0.0;
  for (auto s : parameter_spans(set)) {
    for (double v : s) m = std::max(m, std::abs(v));
  }
  return m;
}

void check_classes(std::span<const Example> examples) {
  if (examples.size() < 2) throw Error("degenerate target: need at least two examples");
  bool has0 = false, has1 = false;
  for (const auto& e : examples) {
    (e.target >= 0.5 ? has1 : has0) = true;
  }
  if (!has0 || !has1) throw Error("degenerate target: training set has a single class");
}

}  // namespace

void rprop_plus_step(Network& net, RpropState& state, const ParamSet& grad, double prev_loss, double cur_loss,
                     const RpropParams& params) {
  auto theta = parameter_spans(net.layers);
  auto step = parameter_spans(state.step);
  auto prev = parameter_spans(state.prev_grad);
  auto change = parameter_spans(state.prev_change);
  const auto g = parameter_spans(grad);
  if (g.size() != theta.size()) throw Error("rprop: gradient shape mismatch");
  const bool loss_increased = cur_loss > prev_loss;

  for (std::size_t s = 0; s < theta.size(); ++s) {
    if (g[s].size() != theta[s].size()) throw Error("rprop: gradient shape mismatch");
    for (std::size_t i = 0; i < theta[s].size(); ++i) {
      const double gi = g[s][i];
      const int agreement = sign_of(gi) * sign_of(prev[s][i]);
      if (agreement > 0) {
        step[s][i] = std::min(step[s][i] * params.eta_plus, params.delta_max);
        const double d = -sign_of(gi) * step[s][i];
        theta[s][i] += d;
        change[s][i] = d;
        prev[s][i] = gi;
      } else if (agreement < 0) {
        step[s][i] = std::max(step[s][i] * params.eta_minus, params.delta_min);
        if (loss_increased) theta[s][i] -= change[s][i];
        change[s][i] = 0.0;
        prev[s][i] = 0.0;
      } else {
        const double d = -sign_of(gi) * step[s][i];
        theta[s][i] += d;
        change[s][i] = d;
        prev[s][i] = gi;
      }
    }
  }
}

TrainResult train_from(Network start, std::span<const Example> examples, const TrainConfig& cfg) {
  TrainResult result;
  result.network = std::move(start);
  auto& net = result.network;
  auto& hist = result.history;
  RpropState state = RpropState::initial(net, cfg.rprop);
  double prev_loss = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 1;; ++epoch) {
    double loss = 0.0;
    const ParamSet grad = gradient(net, examples, loss);
    hist.sse.push_back(loss);
    hist.epochs_run = epoch;
    if (max_abs(grad) < cfg.threshold) {
      hist.stop_reason = StopReason::threshold;
      break;
    }
    if (epoch >= cfg.max_epochs) {
      hist.stop_reason = StopReason::max_epochs;
      break;
    }
    rprop_plus_step(net, state, grad, prev_loss, loss, cfg.rprop);
    prev_loss = loss;
  }
  result.restart_sse.push_back(hist.sse.back());
  return result;
}

TrainResult train(std::span<const Example> examples, const TrainConfig& cfg) {
  cfg.validate();
  check_classes(examples);
  std::vector<std::size_t> sizes{examples.front().x.size()};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(1);

  TrainResult best;
  std::vector<double> finals;
  for (std::size_t r = 0; r < cfg.rep; ++r) {
    const std::uint64_t seed = r == 0 ? cfg.seed : mix_seed(cfg.seed, r);
    auto run = train_from(init_network(sizes, seed, cfg.init_scale), examples, cfg);
    finals.push_back(run.history.sse.back());
    if (r == 0 || run.history.sse.back() < best.history.sse.back()) best = std::move(run);
  }
  best.restart_sse = std::move(finals);
  return best;
}

std::vector<Example> to_examples(std::span<const FeatureVector> features) {
  std::vector<Example> out;
  out.reserve(features.size());
  for (const auto& f : features) {
    if (f.normalized.empty()) throw Error("user " + f.user_id + " has no normalized features");
    out.push_back(Example{f.normalized, static_cast<double>(f.label)});
  }
  return out;
}

TrainResult train(std::span<const FeatureVector> features, const TrainConfig& cfg) {
  const auto examples = to_examples(features);
  return train(std::span<const Example>(examples), cfg);
}

Prediction predict(const Network& net, std::span<const double> x, double class_threshold) {
  const double p = forward(net, x).output;
  return Prediction{p, p >= class_threshold ? 1 : 0};
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(std::span<const int> labels,
                                                                                double test_ratio,
                                                                                std::uint64_t seed) {
  if (!(test_ratio >= 0.0 && test_ratio < 1.0)) throw Error("test ratio must be in [0, 1)");
  Rng rng(seed);
  std::vector<std::size_t> train_idx, test_idx;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(members));
    const auto n_test = static_cast<std::size_t>(std::llround(test_ratio * static_cast<double>(members.size())));
    test_idx.insert(test_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    train_idx.insert(train_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {train_idx, test_idx};
}

std::vector<std::size_t> undersample_majority(std::span<const std::size_t> indices, std::span<const int> labels,
                                              std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (auto i : indices) (labels[i] == 1 ? pos : neg).push_back(i);
  auto& majority = pos.size() > neg.size() ? pos : neg;
  auto& minority = pos.size() > neg.size() ? neg : pos;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(majority));
  majority.resize(minority.size());
  std::vector<std::size_t> out = minority;
  out.insert(out.end(), majority.begin(), majority.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> select_hidden(std::span<const Example> examples,
                                       const std::vector<std::vector<std::size_t>>& candidates,
                                       const TrainConfig& cfg, double validation_ratio) {
  if (candidates.empty()) throw Error("no hidden-layer candidates");
  std::vector<int> labels;
  for (const auto& e : examples) labels.push_back(e.target >= 0.5 ? 1 : 0);
  const auto [fit_idx, val_idx] = stratified_split(labels, validation_ratio, mix_seed(cfg.seed, 0x5e1ec7));
  std::vector<Example> fit, val;
  for (auto i : fit_idx) fit.push_back(examples[i]);
  for (auto i : val_idx) val.push_back(examples[i]);

  double best_score = -1.0;
  std::vector<std::size_t> best;
  for (const auto& hidden : candidates) {
    TrainConfig c = cfg;
    c.hidden = hidden;
    const auto net = train(std::span<const Example>(fit), c).network;
    double tp = 0, tn = 0, pos = 0, neg = 0;
    for (const auto& e : val) {
      const int y = predict(net, e.x, cfg.class_threshold).label;
      if (e.target >= 0.5) {
        ++pos;
        tp += y == 1;
      } else {
        ++neg;
        tn += y == 0;
      }
    }
    const double score = 0.5 * ((pos > 0 ? tp / pos : 0.0) + (neg > 0 ? tn / neg : 0.0));
    if (score > best_score) {
      best_score = score;
      best = hidden;
    }
  }
  return best;
}

nlohmann::json Model::to_json() const {
  nlohmann::json j;
  j["format"] = "biasdetect-model";
  j["version"] = kFormatVersion;
  j["layer_sizes"] = network.layer_sizes;
  j["seed"] = network.rng_seed;
  j["feature_names"] = normalizer.names;
  nlohmann::json norm = nlohmann::json::array();
  for (std::size_t i = 0; i < normalizer.names.size(); ++i) {
    norm.push_back({{"feature", normalizer.names[i]}, {"min", normalizer.min[i]}, {"max", normalizer.max[i]}});
  }
  j["normalization"] = norm;
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : network.layers) {
    layers.push_back({{"inputs", l.inputs}, {"outputs", l.outputs}, {"weights", l.weights}, {"biases", l.biases}});
  }
  j["layers"] = layers;
  j["class_threshold"] = class_threshold;
  return j;
}

Model Model::from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "biasdetect-model") throw Error("not a biasdetect model document");
    const int version = j.at("version").get<int>();
    if (version != kFormatVersion) throw Error("unsupported model version " + std::to_string(version));
    Model m;
    m.network.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    m.network.rng_seed = j.value("seed", std::uint64_t{0});
    for (const auto& n : j.at("normalization")) {
      m.normalizer.names.push_back(n.at("feature").get<std::string>());
      m.normalizer.min.push_back(n.at("min").get<double>());
      m.normalizer.max.push_back(n.at("max").get<double>());
    }
    if (j.at("feature_names").get<std::vector<std::string>>() != m.normalizer.names) {
      throw Error("feature_names and normalization disagree");
    }
    const auto& sizes = m.network.layer_sizes;
    const auto& layers = j.at("layers");
    if (sizes.size() < 2 || layers.size() != sizes.size() - 1) throw Error("layer count does not match layer_sizes");
    if (sizes.front() != m.normalizer.names.size()) throw Error("input width does not match feature_names");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      LayerParams p;
      p.inputs = layers[l].at("inputs").get<std::size_t>();
      p.outputs = layers[l].at("outputs").get<std::size_t>();
      p.weights = layers[l].at("weights").get<std::vector<double>>();
      p.biases = layers[l].at("biases").get<std::vector<double>>();
      if (p.inputs != sizes[l] || p.outputs != sizes[l + 1] || p.weights.size() != p.inputs * p.outputs ||
          p.biases.size() != p.outputs) {
        throw Error("layer " + std::to_string(l) + " has inconsistent shape");
      }
      m.network.layers.push_back(std::move(p));
    }
    m.class_threshold = j.value("class_threshold", 0.5);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed model document: ") + e.what());
  }
}

void Model::save(const std::filesystem::path& path) const {
  write_atomically(path, [&](std::ostream& out) { out << to_json().dump(2) << '\n'; });
}

Model Model::load(const std::filesystem::path& path, std::span<const std::string> expected_features) {
  const auto doc = nlohmann::json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw Error("model " + path.string() + " is not valid JSON");
  Model m = from_json(doc);
  if (!std::equal(m.normalizer.names.begin(), m.normalizer.names.end(), expected_features.begin(),
                  expected_features.end())) {
    std::string got, want;
    for (const auto& n : m.normalizer.names) got += n + " ";
    for (const auto& n : expected_features) want += n + " ";
    throw Error("model features [" + got + "] do not match data features [" + want + "]");
  }
  return m;
}

}  // namespace biasdetect
