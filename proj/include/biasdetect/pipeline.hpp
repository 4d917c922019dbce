#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasdetect/attitude.hpp"
#include "biasdetect/error.hpp"
#include "biasdetect/eval.hpp"
#include "biasdetect/features.hpp"
#include "biasdetect/ingest.hpp"
#include "biasdetect/mlp.hpp"
#include "biasdetect/sentiment.hpp"

namespace biasdetect {

/// What the classifier predicts.
enum class Target {
  biased,        ///< biased (either tail) vs normal, over all users
  among_biased,  ///< overly positive vs overly negative, over biased users only
};

/// Everything a run needs, resolved from one JSON config file. Relative paths
/// are resolved against the config file's directory.
///
/// Keys:
///   dataset.posts (required), dataset.users, dataset.field_map or
///   dataset.field_map_file (required), dataset.end, dataset.subsample,
///   dataset.subsample_seed, lexicon (required), attitude.{k, mode,
///   histogram_bins}, correlation.{method, subsets}, train.{hidden,
///   threshold, max_epochs, rep, init_scale, seed, class_threshold, rprop,
///   balance, hidden_candidates}, split.{test_ratio, seed}, target,
///   output_dir.
struct PipelineConfig {
  std::filesystem::path posts_path;
  std::optional<std::filesystem::path> users_path;
  FieldMap field_map;
  std::optional<Instant> dataset_end;
  std::optional<std::size_t> subsample;
  std::uint64_t subsample_seed = 1;

  std::filesystem::path lexicon_path;

  double k = 3.0;
  AttitudeMode attitude_mode = AttitudeMode::sum;
  std::size_t histogram_bins = 50;

  CorrelationMethod method = CorrelationMethod::spearman;
  std::vector<Subset> subsets{Subset::all, Subset::overly_positive, Subset::overly_negative, Subset::above_mean,
                              Subset::below_mean};

  TrainConfig train;
  bool balance = true;
  std::vector<std::vector<std::size_t>> hidden_candidates;

  double test_ratio = 0.2;
  std::uint64_t split_seed = 7;
  Target target = Target::biased;

  std::filesystem::path output_dir = "out";
  /// Model read by `evaluate`; defaults to output_dir/model.json.
  std::optional<std::filesystem::path> model_path;

  /// Throws Error naming the first missing or invalid key.
  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static PipelineConfig load(const std::filesystem::path& path);

  /// Resolved configuration, echoed into the run report.
  nlohmann::json to_json() const;
};

struct PostScore {
  std::string author_id;
  Instant timestamp;
  double score = 0.0;
};

struct IngestOutcome {
  UserTable users;
  std::vector<RawPost> posts;
  IngestTally user_tally;
  IngestTally post_tally;
};

struct LabelOutcome {
  std::vector<AttitudeRecord> attitudes;  ///< user-id order
  DistributionStats stats;
  std::vector<HistogramBin> histogram;
};

struct FeatureOutcome {
  std::vector<FeatureVector> vectors;  ///< user-id order, normalized
  Normalizer normalizer;
  FeatureTally tally;
  Instant dataset_end;
};

struct CorrelationOutcome {
  std::vector<CorrelationMatrix> matrices;
  /// Subsets that could not be correlated, with the reason.
  std::vector<std::pair<Subset, std::string>> skipped;
};

struct TrainOutcome {
  Model model;
  TrainHistory history;
  std::vector<double> restart_sse;
  std::vector<std::size_t> hidden;
  std::size_t train_size = 0;
  std::size_t train_positive = 0;
};

struct EvalOutcome {
  ContingencyMatrix counts;
  ContingencyMatrix percent;
  double balanced_accuracy = 0.0;  ///< TP+TN over all cells of the row-normalized table
  double plain_accuracy = 0.0;     ///< correct / total on counts
  std::vector<std::string> test_ids;
  std::vector<int> observed;
  std::vector<int> predicted;
  std::vector<double> probability;
  std::vector<std::vector<double>> gw;
  std::vector<GwSummary> gw_summary;
};

IngestOutcome run_ingest(const PipelineConfig& cfg);
/// Scores every post and fills each user's sentiment_scores in
/// (timestamp, text) order. Returns the per-post scores in the same order.
std::vector<PostScore> run_score(const PipelineConfig& cfg, IngestOutcome& ingest, const Lexicon& lexicon);
LabelOutcome run_label(const PipelineConfig& cfg, const UserTable& users);
FeatureOutcome run_features(const PipelineConfig& cfg, const UserTable& users, const LabelOutcome& labels);
CorrelationOutcome run_correlate(const PipelineConfig& cfg, const FeatureOutcome& features);

/// The population the classifier sees for the configured target, with labels
/// rewritten for among_biased.
std::vector<FeatureVector> training_population(const PipelineConfig& cfg, const FeatureOutcome& features);

/// Stratified split of the training population: (train, test) indices.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_population(const PipelineConfig& cfg,
                                                                               std::span<const FeatureVector> pop);

TrainOutcome run_train(const PipelineConfig& cfg, const FeatureOutcome& features);
EvalOutcome run_evaluate(const PipelineConfig& cfg, const FeatureOutcome& features, const Model& model);

/// Headline numbers of a run, for callers that drive the pipeline in-process.
struct RunSummary {
  std::size_t n_users = 0;
  std::size_t n_posts = 0;
  DistributionStats stats;
  double fraction_normal = 0.0;
  std::optional<double> balanced_accuracy;
  std::optional<double> plain_accuracy;
  std::vector<std::filesystem::path> artifacts;
};

/// Runs one subcommand (ingest, score, label, correlate, train, evaluate,
/// pipeline) and writes its artifacts plus report.txt into output_dir.
/// Throws StageError on failure.
RunSummary run_command(std::string_view command, const PipelineConfig& cfg);

/// Failure inside a named pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("stage '" + stage + "': " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

bool is_pipeline_command(std::string_view command);

}  // namespace biasdetect
