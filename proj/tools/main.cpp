#include <CLI11.hpp>

#include <iostream>

#include "biasdetect/io.hpp"
#include "biasdetect/pipeline.hpp"
#include "biasdetect/synth.hpp"

namespace bd = biasdetect;

namespace {

struct Overrides {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> k;
  bool mean_attitude = false;
  bool among_biased = false;
  std::string model;
};

void apply(const Overrides& o, bd::PipelineConfig& cfg) {
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.seed) cfg.train.seed = *o.seed;
  if (o.k) {
    if (!(*o.k > 0)) throw bd::Error("config: --k must be positive");
    cfg.k = *o.k;
  }
  if (o.mean_attitude) cfg.attitude_mode = bd::AttitudeMode::mean;
  if (o.among_biased) cfg.target = bd::Target::among_biased;
  if (!o.model.empty()) cfg.model_path = o.model;
}

int run_synth(const std::string& config_path, const std::string& lexicon_path, const std::string& out,
              const std::optional<std::size_t>& n_users, const std::optional<std::uint64_t>& seed) {
  try {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
      j = nlohmann::json::parse(bd::read_file(config_path), nullptr, false);
      if (j.is_discarded()) throw bd::Error("config: " + config_path + " is not valid JSON");
    }
    if (n_users) j["n_users"] = *n_users;
    if (seed) j["seed"] = *seed;
    const auto cfg = bd::SynthConfig::from_json(j);
    const auto lexicon = bd::load_lexicon(lexicon_path);
    const auto result = bd::generate_population(cfg, lexicon, out);
    std::cout << "synth: " << result.truth.size() << " users, " << result.total_posts << " posts -> " << out
              << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "biasdetect: stage 'synth': " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detect users with biased attitudes in social network data"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  for (const char* name : {"ingest", "score", "label", "correlate", "train", "evaluate", "pipeline"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", overrides.out, "output directory");
    sub->add_option("--seed", overrides.seed, "training seed");
    sub->add_option("--k", overrides.k, "sigma multiplier for bias labels");
    sub->add_flag("--mean-attitude", overrides.mean_attitude, "average scores instead of summing");
    sub->add_flag("--among-biased", overrides.among_biased, "classify positive vs negative among biased users");
    sub->add_option("--model", overrides.model, "model file for evaluate");
  }

  std::string synth_config, synth_lexicon, synth_out = "synth";
  std::optional<std::size_t> synth_users;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "generate a synthetic population");
  synth->add_option("-c,--config", synth_config, "generator config (JSON)")->check(CLI::ExistingFile);
  synth->add_option("-l,--lexicon", synth_lexicon, "lexicon the post texts are built from")
      ->required()
      ->check(CLI::ExistingFile);
  synth->add_option("-o,--out", synth_out, "output directory");
  synth->add_option("-n,--n-users", synth_users);
  synth->add_option("--seed", synth_seed);

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) return run_synth(synth_config, synth_lexicon, synth_out, synth_users, synth_seed);

  const std::string command = app.get_subcommands().front()->get_name();
  bd::PipelineConfig cfg;
  try {
    cfg = bd::PipelineConfig::load(config_path);
    apply(overrides, cfg);
  } catch (const std::exception& e) {
    std::cerr << "biasdetect: stage 'config': " << e.what() << "\n";
    return 2;
  }
  try {
    const auto summary = bd::run_command(command, cfg);
    std::cout << command << ": " << summary.n_users << " users, " << summary.n_posts << " posts";
    if (summary.balanced_accuracy) std::cout << ", accuracy " << bd::format_real(*summary.balanced_accuracy) << "%";
    std::cout << "\n";
    for (const auto& p : summary.artifacts) std::cout << "  wrote " << p.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "biasdetect: " << e.what() << "\n";
    return 1;
  }
}
