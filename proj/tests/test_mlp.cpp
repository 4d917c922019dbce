#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "biasdetect/error.hpp"
#include "biasdetect/mlp.hpp"
#include "biasdetect/rng.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace biasdetect;

namespace {

std::vector<Example> random_batch(Rng& rng, std::size_t inputs, std::size_t n) {
  std::vector<Example> batch(n);
  for (auto& ex : batch) {
    ex.x.resize(inputs);
    for (auto& v : ex.x) v = rng.uniform();
    ex.target = static_cast<double>(rng.below(2));
  }
  return batch;
}

Network single_param_net(double w) {
  Network net = init_network({1, 1}, 0, 0.0);
  net.layers[0].w(0, 0) = w;
  return net;
}

ParamSet single_grad(double g) {
  ParamSet p{LayerParams(1, 1)};
  p[0].weights[0] = g;
  p[0].biases[0] = 0.0;
  return p;
}

std::vector<Example> xor_data() {
  return {{{0, 0}, 0}, {{0, 1}, 1}, {{1, 0}, 1}, {{1, 1}, 0}};
}

}  // namespace

TEST_CASE("init_network shapes, seeding and range") {
  const auto net = init_network({3, 4, 2, 1}, 42, 1.0);
  REQUIRE(net.layers.size() == 3);
  CHECK(net.layers[0].inputs == 3);
  CHECK(net.layers[0].outputs == 4);
  CHECK(net.layers[1].weights.size() == 8);
  CHECK(net.layers[2].weights.size() == 2);
  CHECK(net.layers[0].biases.size() == 4);
  CHECK(net.layers[1].biases.size() == 2);
  CHECK(net.layers[2].biases.size() == 1);
  CHECK(net.parameter_count() == 3 * 4 + 4 + 4 * 2 + 2 + 2 + 1);
  CHECK(init_network({3, 4, 2, 1}, 42, 1.0) == net);
  CHECK_FALSE(init_network({3, 4, 2, 1}, 43, 1.0) == net);
  for (const auto& layer : init_network({5, 6, 1}, 1, 0.25).layers) {
    for (double w : layer.weights) CHECK(std::abs(w) <= 0.25);
  }
  CHECK_THROWS_AS(init_network({3, 0, 1}, 1, 1.0), Error);
  CHECK_THROWS_AS(init_network({3, 2, 2}, 1, 1.0), Error);
}

TEST_CASE("zero network outputs one half") {
  const auto net = init_network({3, 4, 2, 1}, 1, 0.0);
  for (const auto& layer : net.layers) {
    for (double w : layer.weights) CHECK(w == 0.0);
  }
  CHECK(forward(net, std::vector<double>{0.3, 0.9, 0.1}).output == 0.5);
  CHECK(predict(net, std::vector<double>{1, 1, 1}).probability == 0.5);
  CHECK(predict(net, std::vector<double>{1, 1, 1}).label == 1);
}

TEST_CASE("forward closed forms") {
  auto net = single_param_net(0.0);
  CHECK(forward(net, std::vector<double>{123.0}).output == 0.5);
  net.layers[0].w(0, 0) = 1.0;
  CHECK(forward(net, std::vector<double>{std::log(3.0)}).output == doctest::Approx(0.75).epsilon(1e-15));
  CHECK_THROWS_AS(forward(net, std::vector<double>{1.0, 2.0}), Error);
}

TEST_CASE("sigmoid is stable at the extremes") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(-1000.0) >= 0.0);
  CHECK(sigmoid(1000.0) <= 1.0);
  CHECK(std::isfinite(sigmoid(-1e308)));
}

TEST_CASE("forward is monotone in an input when all weights are positive") {
  Rng rng(12);
  for (int t = 0; t < 50; ++t) {
    auto net = init_network({3, 4, 2, 1}, 100 + t, 1.0);
    for (auto& layer : net.layers) {
      for (auto& w : layer.weights) w = std::abs(w);
    }
    std::vector<double> x{rng.uniform(), rng.uniform(), rng.uniform()};
    const double base = forward(net, x).output;
    CHECK(base > 0.0);
    CHECK(base < 1.0);
    x[t % 3] += 0.1;
    CHECK(forward(net, x).output >= base);
  }
}

TEST_CASE("sse") {
  CHECK(sse(std::vector<double>{0.2, 0.9}, std::vector<double>{0.2, 0.9}) == 0.0);
  CHECK(sse(std::vector<double>{0.5}, std::vector<double>{1.0}) == 0.125);
  const std::vector<double> o{0.1, 0.7, 0.4, 0.9}, z{0, 1, 1, 0};
  const double whole = sse(o, z);
  const double parts = sse(std::span(o).first(2), std::span(z).first(2)) + sse(std::span(o).last(2), std::span(z).last(2));
  CHECK(whole == doctest::Approx(parts).epsilon(1e-15));
  CHECK_THROWS_AS(sse(std::vector<double>{0.1}, std::vector<double>{0, 1}), Error);
}

TEST_CASE("gradient matches finite differences on 3-4-2-1 nets") {
  Rng rng(77);
  for (int t = 0; t < 20; ++t) {
    const auto net = init_network({3, 4, 2, 1}, 500 + t, 1.0);
    const auto batch = random_batch(rng, 3, 1 + rng.below(16));
    const auto analytic = oracle::flatten(gradient(net, batch));
    const auto numeric = oracle::fd_gradient(net, batch, 1e-5);
    REQUIRE(analytic.size() == numeric.size());
    for (std::size_t i = 0; i < analytic.size(); ++i) CHECK(oracle::rel_error(analytic[i], numeric[i]) < 1e-5);
  }
}

TEST_CASE("gradient is zero at a perfect fit and additive over examples") {
  const auto net = init_network({2, 3, 1}, 8, 1.0);
  const std::vector<double> x{0.2, 0.6};
  const std::vector<Example> perfect{{x, forward(net, x).output}};
  for (double g : oracle::flatten(gradient(net, perfect))) CHECK(g == 0.0);

  Rng rng(1);
  const auto batch = random_batch(rng, 2, 2);
  const auto both = oracle::flatten(gradient(net, batch));
  const auto a = oracle::flatten(gradient(net, std::span(batch).first(1)));
  const auto b = oracle::flatten(gradient(net, std::span(batch).last(1)));
  for (std::size_t i = 0; i < both.size(); ++i) CHECK(both[i] == doctest::Approx(a[i] + b[i]).epsilon(1e-14));
  CHECK_THROWS_AS(gradient(net, std::vector<Example>{}), Error);
}

TEST_CASE("rprop+: agreeing signs grow the step") {
  RpropParams p;
  auto net = single_param_net(1.0);
  auto state = RpropState::initial(net, p);
  state.step[0].weights[0] = 0.1;
  state.prev_grad[0].weights[0] = 1.0;
  rprop_plus_step(net, state, single_grad(1.0), 1.0, 1.0, p);
  CHECK(state.step[0].weights[0] == doctest::Approx(0.12).epsilon(1e-15));
  CHECK(net.layers[0].weights[0] == doctest::Approx(1.0 - 0.12).epsilon(1e-15));
}

TEST_CASE("rprop+: zero gradient leaves parameters alone") {
  RpropParams p;
  auto net = init_network({2, 2, 1}, 3, 1.0);
  const auto before = net;
  auto state = RpropState::initial(net, p);
  rprop_plus_step(net, state, zeros_like(net.layers), 1.0, 1.0, p);
  CHECK(net == before);
}

TEST_CASE("rprop+: sign flip with higher loss reverts the previous change exactly") {
  RpropParams p;
  auto net = single_param_net(1.0);
  auto state = RpropState::initial(net, p);
  state.step[0].weights[0] = 0.5;
  rprop_plus_step(net, state, single_grad(2.0), 10.0, 4.0, p);
  CHECK(net.layers[0].weights[0] == 0.5);
  rprop_plus_step(net, state, single_grad(-3.0), 4.0, 5.0, p);
  CHECK(net.layers[0].weights[0] == 1.0);
  CHECK(state.step[0].weights[0] == 0.25);
  CHECK(state.prev_grad[0].weights[0] == 0.0);
  // Next step behaves like the zero-product branch: move, keep the step.
  rprop_plus_step(net, state, single_grad(-1.0), 5.0, 3.0, p);
  CHECK(net.layers[0].weights[0] == 1.25);
  CHECK(state.step[0].weights[0] == 0.25);
}

TEST_CASE("rprop+: sign flip with lower loss keeps the weight") {
  RpropParams p;
  auto net = single_param_net(1.0);
  auto state = RpropState::initial(net, p);
  state.step[0].weights[0] = 0.5;
  rprop_plus_step(net, state, single_grad(2.0), 10.0, 4.0, p);
  rprop_plus_step(net, state, single_grad(-3.0), 4.0, 3.0, p);
  CHECK(net.layers[0].weights[0] == 0.5);
}

TEST_CASE("rprop+: step sizes stay clamped") {
  RpropParams p;
  Rng rng(31);
  auto net = init_network({3, 3, 1}, 2, 1.0);
  auto state = RpropState::initial(net, p);
  double prev = 1.0;
  for (int i = 0; i < 400; ++i) {
    auto g = zeros_like(net.layers);
    for (auto span : parameter_spans(g)) {
      for (auto& v : span) v = i < 200 ? 1.0 : (rng.below(2) ? 1.0 : -1.0);
    }
    const double cur = rng.uniform();
    rprop_plus_step(net, state, g, prev, cur, p);
    prev = cur;
    for (auto span : parameter_spans(std::as_const(state.step))) {
      for (double s : span) {
        CHECK(s >= p.delta_min);
        CHECK(s <= p.delta_max);
      }
    }
  }
}

TEST_CASE("train: infinite threshold stops after one epoch") {
  TrainConfig cfg;
  cfg.hidden = {2, 2};
  cfg.threshold = std::numeric_limits<double>::infinity();
  const auto r = train(std::span<const Example>(xor_data()), cfg);
  CHECK(r.history.epochs_run == 1);
  CHECK(r.history.sse.size() == 1);
  CHECK(r.history.stop_reason == StopReason::threshold);
}

TEST_CASE("train: max_epochs stop and history length") {
  TrainConfig cfg;
  cfg.hidden = {2, 2};
  cfg.threshold = 0.0;
  cfg.max_epochs = 37;
  const auto r = train(std::span<const Example>(xor_data()), cfg);
  CHECK(r.history.epochs_run == 37);
  CHECK(r.history.sse.size() == 37);
  CHECK(r.history.stop_reason == StopReason::max_epochs);
  for (double e : r.history.sse) CHECK(e >= 0.0);
}

TEST_CASE("train is deterministic and order-free") {
  TrainConfig cfg;
  cfg.hidden = {3};
  cfg.max_epochs = 300;
  Rng rng(5);
  auto data = random_batch(rng, 3, 40);
  data[0].target = 0;
  data[1].target = 1;
  const auto a = train(std::span<const Example>(data), cfg);
  const auto b = train(std::span<const Example>(data), cfg);
  CHECK(a.history == b.history);
  CHECK(a.network == b.network);
  // Reversing the order changes only the summation order of the gradient.
  std::reverse(data.begin(), data.end());
  const auto c = train(std::span<const Example>(data), cfg);
  CHECK(c.history.epochs_run == a.history.epochs_run);
  CHECK(c.history.sse.back() == doctest::Approx(a.history.sse.back()).epsilon(1e-9));
}

TEST_CASE("train keeps the lowest-SSE restart") {
  TrainConfig cfg;
  cfg.hidden = {2, 2};
  cfg.rep = 6;
  cfg.max_epochs = 200;
  const auto r = train(std::span<const Example>(xor_data()), cfg);
  REQUIRE(r.restart_sse.size() == 6);
  for (double s : r.restart_sse) CHECK(r.history.sse.back() <= s);
}

TEST_CASE("train rejects a single class") {
  std::vector<Example> data{{{0.1}, 1}, {{0.2}, 1}};
  CHECK_THROWS_WITH_AS(train(std::span<const Example>(data), TrainConfig{}), doctest::Contains("degenerate target"),
                       Error);
}

TEST_CASE("XOR is learned with hidden [2,2] inside a 1000-epoch budget") {
  // Ten restarts of at most 100 epochs each. The gradient stop is off: it
  // fires before the SSE target is reached.
  TrainConfig cfg;
  cfg.hidden = {2, 2};
  cfg.rep = 10;
  cfg.max_epochs = 100;
  cfg.threshold = 0.0;
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    cfg.seed = seed;
    const auto r = train(std::span<const Example>(xor_data()), cfg);
    ok += r.history.sse.back() < 0.01;
  }
  CHECK(ok >= 9);
}

TEST_CASE("train config validation and JSON") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.rprop.eta_plus = 0.9;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.rprop.delta_zero = 100;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.max_epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);

  cfg = TrainConfig{};
  cfg.hidden = {5, 3};
  cfg.rep = 4;
  cfg.threshold = std::numeric_limits<double>::infinity();
  const auto back = TrainConfig::from_json(cfg.to_json());
  CHECK(back.hidden == cfg.hidden);
  CHECK(back.rep == 4);
  CHECK(std::isinf(back.threshold));
}

TEST_CASE("predict threshold is inclusive") {
  const auto net = init_network({2, 1}, 1, 0.0);
  CHECK(predict(net, std::vector<double>{0, 0}, 0.5).label == 1);
  CHECK(predict(net, std::vector<double>{0, 0}, 0.51).label == 0);
  CHECK_THROWS_AS(predict(net, std::vector<double>{0}), Error);
}

TEST_CASE("stratified split and undersampling") {
  std::vector<int> labels(1000, 0);
  for (int i = 0; i < 30; ++i) labels[i * 33] = 1;
  const auto [train_idx, test_idx] = stratified_split(labels, 0.2, 7);
  CHECK(train_idx.size() + test_idx.size() == 1000);
  const auto pos_test = std::count_if(test_idx.begin(), test_idx.end(), [&](auto i) { return labels[i] == 1; });
  CHECK(pos_test == 6);
  CHECK(stratified_split(labels, 0.2, 7) == std::make_pair(train_idx, test_idx));
  std::vector<bool> seen(1000, false);
  for (auto i : train_idx) seen[i] = true;
  for (auto i : test_idx) {
    CHECK_FALSE(seen[i]);
    seen[i] = true;
  }

  const auto balanced = undersample_majority(train_idx, labels, 3);
  const auto pos = std::count_if(balanced.begin(), balanced.end(), [&](auto i) { return labels[i] == 1; });
  CHECK(pos == 24);
  CHECK(balanced.size() == 48);
}

TEST_CASE("model save and load") {
  testing::TempDir dir;
  Model m;
  m.network = init_network({3, 4, 2, 1}, 9, 1.0);
  m.normalizer.names = {"nr", "li", "nfr"};
  m.normalizer.min = {1, 0, 0};
  m.normalizer.max = {100, 3000.5, 40};
  m.class_threshold = 0.4;
  m.save(dir / "model.json");
  const std::vector<std::string> names{"nr", "li", "nfr"};
  const auto back = Model::load(dir / "model.json", names);
  CHECK(back.network.layers == m.network.layers);
  CHECK(back.network.layer_sizes == m.network.layer_sizes);
  CHECK(back.normalizer.max == m.normalizer.max);
  CHECK(back.class_threshold == 0.4);
  const auto doc = nlohmann::json::parse(testing::slurp(dir / "model.json"));
  CHECK(doc.at("version") == Model::kFormatVersion);

  const std::vector<std::string> other{"nr", "li", "nfo"};
  CHECK_THROWS_AS(Model::load(dir / "model.json", other), Error);
}
