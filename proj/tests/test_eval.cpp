#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "biasdetect/error.hpp"
#include "biasdetect/eval.hpp"
#include "biasdetect/rng.hpp"
#include "oracles.hpp"

using namespace biasdetect;

namespace {

ContingencyMatrix table(double nn, double np, double pn, double pp) {
  ContingencyMatrix m;
  m.cells = {{{nn, np}, {pn, pp}}};
  m.row_normalized = true;
  return m;
}

}  // namespace

TEST_CASE("contingency") {
  const std::vector<int> obs{0, 0, 1, 1}, pred{0, 1, 1, 1};
  const auto m = contingency(pred, obs, true);
  CHECK(m.cells[0][0] == 50.0);
  CHECK(m.cells[0][1] == 50.0);
  CHECK(m.cells[1][0] == 0.0);
  CHECK(m.cells[1][1] == 100.0);
  const auto perfect = contingency(obs, obs, true);
  CHECK(perfect.tn() == 100.0);
  CHECK(perfect.tp() == 100.0);
  CHECK(perfect.fp() == 0.0);
  CHECK(perfect.fn() == 0.0);

  const auto counts = contingency(pred, obs, false);
  CHECK(counts.tn() + counts.fp() + counts.fn() + counts.tp() == 4.0);
  CHECK(counts.fp() == 1.0);

  CHECK_THROWS_AS(contingency(std::vector<int>{0}, std::vector<int>{0, 1}, false), Error);
  CHECK_THROWS_AS(contingency(std::vector<int>{}, std::vector<int>{}, false), Error);
  CHECK_THROWS_AS(contingency(std::vector<int>{0, 1}, std::vector<int>{0, 0}, true), Error);
  CHECK_NOTHROW(contingency(std::vector<int>{0, 1}, std::vector<int>{0, 0}, false));
}

TEST_CASE("accuracy on reference contingency tables") {
  CHECK(std::abs(accuracy(table(99.8, 0.2, 21.3, 78.7)) - 89.25) < 1e-9);
  CHECK(std::abs(accuracy(table(66.5, 33.5, 33.2, 66.8)) - 66.65) < 1e-9);
  CHECK(std::abs(accuracy(table(99.8, 0.2, 37.8, 62.2)) - 81.0) < 1e-9);
  CHECK_THROWS_AS(accuracy(table(0, 0, 0, 0)), Error);
}

TEST_CASE("accuracy properties over random predictions") {
  Rng rng(10);
  for (int t = 0; t < 300; ++t) {
    const auto n = 2 + rng.below(200);
    std::vector<int> obs(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      obs[i] = static_cast<int>(rng.below(2));
      pred[i] = rng.below(4) ? obs[i] : 1 - obs[i];
    }
    obs[0] = 0;
    obs[1] = 1;
    const auto counts = contingency(pred, obs, false);
    const auto pct = contingency(pred, obs, true);
    for (int r = 0; r < 2; ++r) CHECK(std::abs(pct.cells[r][0] + pct.cells[r][1] - 100.0) <= 1e-9);

    const double acc = accuracy(pct);
    CHECK(acc >= 0.0);
    CHECK(acc <= 100.0);
    const double recall_neg = counts.tn() / (counts.tn() + counts.fp());
    const double recall_pos = counts.tp() / (counts.tp() + counts.fn());
    CHECK(std::abs(acc - 50.0 * (recall_neg + recall_pos)) <= 1e-9);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) correct += pred[i] == obs[i];
    CHECK(std::abs(accuracy(counts) - 100.0 * static_cast<double>(correct) / static_cast<double>(n)) <= 1e-9);
    CHECK((acc == 100.0) == (correct == n));
  }
}

TEST_CASE("generalized weights of a single unit equal its weights") {
  Rng rng(3);
  auto net = init_network({4, 1}, 5, 1.0);
  std::vector<std::vector<double>> xs(25, std::vector<double>(4));
  for (auto& x : xs) {
    for (auto& v : x) v = rng.uniform();
  }
  const auto gw = generalized_weights(net, std::span<const std::vector<double>>(xs));
  REQUIRE(gw.size() == xs.size());
  for (const auto& row : gw) {
    for (std::size_t i = 0; i < 4; ++i) CHECK(row[i] == net.layers[0].w(i, 0));
  }
}

TEST_CASE("generalized weights of a zero network vanish") {
  const auto net = init_network({3, 4, 2, 1}, 5, 0.0);
  const std::vector<std::vector<double>> xs{{0.1, 0.2, 0.3}, {1, 0, 1}};
  for (const auto& row : generalized_weights(net, std::span<const std::vector<double>>(xs))) {
    for (double g : row) CHECK(g == 0.0);
  }
}

TEST_CASE("generalized weights match finite differences of the log-odds") {
  Rng rng(44);
  for (int t = 0; t < 30; ++t) {
    const auto net = init_network({3, 4, 2, 1}, 900 + t, 1.0);
    std::vector<std::vector<double>> xs(5, std::vector<double>(3));
    for (auto& x : xs) {
      for (auto& v : x) v = rng.uniform();
    }
    const auto gw = generalized_weights(net, std::span<const std::vector<double>>(xs));
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const auto fd = oracle::fd_log_odds(net, xs[k], 1e-5);
      for (std::size_t i = 0; i < 3; ++i) CHECK(oracle::rel_error(gw[k][i], fd[i]) < 1e-5);
    }
  }
  const auto net = init_network({3, 2, 1}, 1, 1.0);
  const std::vector<std::vector<double>> bad{{0.1, 0.2}};
  CHECK_THROWS_AS(generalized_weights(net, std::span<const std::vector<double>>(bad)), Error);
}

TEST_CASE("gw summary") {
  const std::vector<std::vector<double>> gw{{1, -4}, {3, 0}, {2, 5}, {10, 1}};
  const std::vector<std::string> names{"a", "b"};
  const auto s = summarize_gw(gw, names);
  REQUIRE(s.size() == 2);
  CHECK(s[0].feature == "a");
  CHECK(s[0].min == 1);
  CHECK(s[0].median == 2.5);
  CHECK(s[0].max == 10);
  CHECK(s[1].median == 0.5);
}
