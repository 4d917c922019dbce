#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "biasdetect/attitude.hpp"
#include "biasdetect/eval.hpp"
#include "biasdetect/features.hpp"
#include "biasdetect/mlp.hpp"
#include "biasdetect/pipeline.hpp"
#include "biasdetect/sentiment.hpp"
#include "biasdetect/synth.hpp"

namespace py = pybind11;
namespace bd = biasdetect;

namespace {

std::vector<bd::Example> examples(const std::vector<std::vector<double>>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw bd::Error("inputs and targets differ in length");
  std::vector<bd::Example> out;
  for (std::size_t i = 0; i < xs.size(); ++i) out.push_back({xs[i], ys[i]});
  return out;
}

py::dict summary_dict(const bd::RunSummary& s) {
  py::dict d;
  d["n_users"] = s.n_users;
  d["n_posts"] = s.n_posts;
  d["mean"] = s.stats.mean;
  d["std_dev"] = s.stats.std_dev;
  d["fraction_normal"] = s.fraction_normal;
  d["balanced_accuracy"] = s.balanced_accuracy;
  d["plain_accuracy"] = s.plain_accuracy;
  std::vector<std::string> artifacts;
  for (const auto& p : s.artifacts) artifacts.push_back(p.string());
  d["artifacts"] = artifacts;
  return d;
}

}  // namespace

PYBIND11_MODULE(_biasdetect, m) {
  m.doc() = "Biased-attitude detection core";

  auto error = py::register_exception<bd::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<bd::StageError>(m, "StageError", error.ptr());

  py::class_<bd::Lexicon>(m, "Lexicon")
      .def("polarity", &bd::Lexicon::polarity)
      .def("is_negator", &bd::Lexicon::is_negator)
      .def("__len__", [](const bd::Lexicon& l) { return l.entries.size(); })
      .def_readonly("duplicate_warnings", &bd::Lexicon::duplicate_warnings);
  m.def("load_lexicon", &bd::load_lexicon, py::arg("path"));
  m.def("parse_lexicon", [](const std::string& text) { return bd::parse_lexicon(text); }, py::arg("text"));
  m.def("score_text", [](const std::string& text, const bd::Lexicon& lex) { return bd::score_text(text, lex); },
        py::arg("text"), py::arg("lexicon"));

  py::class_<bd::DistributionStats>(m, "DistributionStats")
      .def_readonly("mean", &bd::DistributionStats::mean)
      .def_readonly("std_dev", &bd::DistributionStats::std_dev)
      .def_readonly("k", &bd::DistributionStats::k)
      .def_readonly("n_users", &bd::DistributionStats::n_users)
      .def_property_readonly("upper", &bd::DistributionStats::upper)
      .def_property_readonly("lower", &bd::DistributionStats::lower);
  m.def("fit_stats", [](const std::vector<double>& a, double k) { return bd::fit_stats(a, k); }, py::arg("attitudes"),
        py::arg("k") = 3.0);
  m.def("label_bias", [](double a, const bd::DistributionStats& s) { return std::string(bd::to_string(bd::label_bias(a, s))); },
        py::arg("attitude"), py::arg("stats"));

  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) { return bd::pearson(x, y); });
  m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return bd::spearman(x, y); });
  m.def("average_ranks", [](const std::vector<double>& v) { return bd::average_ranks(v); });

  m.def(
      "accuracy",
      [](const std::array<std::array<double, 2>, 2>& cells, bool row_normalized) {
        bd::ContingencyMatrix c;
        c.cells = cells;
        c.row_normalized = row_normalized;
        return bd::accuracy(c);
      },
      py::arg("cells"), py::arg("row_normalized") = true,
      "cells[observed][predicted], observed 0 (negative) first");
  m.def(
      "contingency",
      [](const std::vector<int>& predicted, const std::vector<int>& observed, bool row_normalize) {
        return bd::contingency(predicted, observed, row_normalize).cells;
      },
      py::arg("predicted"), py::arg("observed"), py::arg("row_normalize") = true);

  py::class_<bd::Network>(m, "Network")
      .def_readonly("layer_sizes", &bd::Network::layer_sizes)
      .def_property_readonly("parameter_count", &bd::Network::parameter_count)
      .def("forward", [](const bd::Network& n, const std::vector<double>& x) { return bd::forward(n, x).output; });
  m.def("init_network", &bd::init_network, py::arg("layer_sizes"), py::arg("seed"), py::arg("init_scale") = 1.0);
  m.def(
      "train",
      [](const std::vector<std::vector<double>>& xs, const std::vector<double>& ys, const std::string& config_json) {
        const auto cfg = bd::TrainConfig::from_json(nlohmann::json::parse(config_json));
        const auto data = examples(xs, ys);
        auto r = bd::train(std::span<const bd::Example>(data), cfg);
        return py::make_tuple(r.network, r.history.sse, std::string(bd::to_string(r.history.stop_reason)));
      },
      py::arg("inputs"), py::arg("targets"), py::arg("config_json") = "{}");
  m.def(
      "generalized_weights",
      [](const bd::Network& n, const std::vector<std::vector<double>>& xs) {
        return bd::generalized_weights(n, std::span<const std::vector<double>>(xs));
      },
      py::arg("network"), py::arg("inputs"));

  m.def(
      "synth",
      [](const std::string& config_json, const std::filesystem::path& lexicon, const std::filesystem::path& out_dir) {
        const auto cfg = bd::SynthConfig::from_json(nlohmann::json::parse(config_json));
        const auto r = bd::generate_population(cfg, bd::load_lexicon(lexicon), out_dir);
        py::dict d;
        d["config_path"] = r.config_path.string();
        d["n_users"] = r.truth.size();
        d["total_posts"] = r.total_posts;
        return d;
      },
      py::arg("config_json"), py::arg("lexicon"), py::arg("out_dir"));

  m.def(
      "run",
      [](const std::string& command, const std::filesystem::path& config, std::optional<std::filesystem::path> out) {
        auto cfg = bd::PipelineConfig::load(config);
        if (out) cfg.output_dir = *out;
        bd::RunSummary s;
        {
          py::gil_scoped_release release;
          s = bd::run_command(command, cfg);
        }
        return summary_dict(s);
      },
      py::arg("command"), py::arg("config"), py::arg("output_dir") = py::none());
}
