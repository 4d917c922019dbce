#include "biasdetect/eval.hpp"

#include <algorithm>

#include "biasdetect/error.hpp"

namespace biasdetect {

ContingencyMatrix contingency(std::span<const int> predicted, std::span<const int> observed, bool row_normalize) {
  if (predicted.size() != observed.size()) throw Error("contingency: length mismatch");
  if (predicted.empty()) throw Error("contingency: no observations");
  ContingencyMatrix m;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int o = observed[i];
    const int p = predicted[i];
    if ((o != 0 && o != 1) || (p != 0 && p != 1)) throw Error("contingency: labels must be 0 or 1");
    m.cells[o][p] += 1.0;
  }
  if (row_normalize) {
    for (int o = 0; o < 2; ++o) {
      const double total = m.cells[o][0] + m.cells[o][1];
      if (total == 0) {
        throw Error(std::string("contingency: observed class ") + (o == 0 ? "Neg" : "Pos") + " has no members");
      }
      m.cells[o][0] = 100.0 * m.cells[o][0] / total;
      m.cells[o][1] = 100.0 * m.cells[o][1] / total;
    }
    m.row_normalized = true;
  }
  return m;
}

double accuracy(const ContingencyMatrix& m) {
  const double total = m.tp() + m.tn() + m.fp() + m.fn();
  if (total <= 0) throw Error("accuracy: empty contingency matrix");
  return (m.tp() + m.tn()) / total * 100.0;
}

std::vector<std::vector<double>> generalized_weights(const Network& net, std::span<const std::vector<double>> inputs) {
  std::vector<std::vector<double>> out;
  out.reserve(inputs.size());
  std::vector<double> g, upstream;
  for (const auto& x : inputs) {
    const auto pass = forward(net, x);
    // The output log-odds equal the output unit's pre-activation.
    g.assign(1, 1.0);
    for (std::size_t l = net.layers.size(); l-- > 0;) {
      const auto& layer = net.layers[l];
      upstream.assign(layer.inputs, 0.0);
      for (std::size_t i = 0; i < layer.inputs; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < layer.outputs; ++j) s += layer.w(i, j) * g[j];
        upstream[i] = s;
      }
      if (l > 0) {
        const auto& a = pass.activations[l];
        for (std::size_t i = 0; i < layer.inputs; ++i) upstream[i] *= a[i] * (1.0 - a[i]);
      }
      g.swap(upstream);
    }
    out.push_back(g);
  }
  return out;
}

std::vector<std::vector<double>> generalized_weights(const Network& net, std::span<const FeatureVector> features) {
  std::vector<std::vector<double>> inputs;
  inputs.reserve(features.size());
  for (const auto& f : features) inputs.push_back(f.normalized);
  return generalized_weights(net, std::span<const std::vector<double>>(inputs));
}

std::vector<GwSummary> summarize_gw(const std::vector<std::vector<double>>& gw, std::span<const std::string> names) {
  std::vector<GwSummary> out;
  for (std::size_t f = 0; f < names.size(); ++f) {
    std::vector<double> col;
    col.reserve(gw.size());
    for (const auto& row : gw) col.push_back(row.at(f));
    GwSummary s{names[f]};
    if (!col.empty()) {
      std::sort(col.begin(), col.end());
      s.min = col.front();
      s.max = col.back();
      const std::size_t mid = col.size() / 2;
      s.median = col.size() % 2 ? col[mid] : 0.5 * (col[mid - 1] + col[mid]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace biasdetect
