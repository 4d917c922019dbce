#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasdetect/attitude.hpp"
#include "biasdetect/ingest.hpp"
#include "biasdetect/rng.hpp"
#include "biasdetect/sentiment.hpp"

namespace biasdetect {

enum class SynthFormat {
  yelp_jsonl,  ///< users.jsonl + reviews.jsonl
  tweets_csv,  ///< tweets.csv with a profile snapshot on every row
};

/// Parameters of the synthetic population.
///
/// Every user draws standard-normal scores z_nr, z_li, z_nfr, z_nfo. The
/// noise-free latent attitude is sum(effect * z), plus a jump of
/// +/- bias_jump * sd for the users in the upper and lower
/// target_bias_fraction / 2 tails. Post texts are generated to score close
/// to latent + noise_sd * N(0, 1). Observed counts are monotone maps of the
/// z scores, so rank correlations follow the latent ones.
struct SynthConfig {
  std::size_t n_users = 1000;
  std::uint64_t seed = 1;
  double target_bias_fraction = 0.03;
  /// Keys: nr, li, nfr, nfo.
  std::map<std::string, double> effect_sizes{{"nr", 0.7}, {"li", 0.15}, {"nfr", 0.2}, {"nfo", 0.2}};
  double noise_sd = 0.5;
  /// Tail jump in units of the latent's standard deviation.
  double bias_jump = 5.0;

  // nr = clamp(round(exp(posts_log_mean + posts_log_sd * z_nr)), 1, max_posts)
  double posts_log_mean = 2.3;
  double posts_log_sd = 0.5;
  std::int64_t max_posts = 500;
  double friends_log_mean = 3.0;
  double friends_log_sd = 0.8;
  double followers_log_mean = 4.0;
  double followers_log_sd = 1.0;
  bool include_followers = true;
  /// Standard deviation of per-post deviations around the user's mean score.
  double post_jitter = 0.3;

  Instant period_start = Instant{std::chrono::seconds{1077840000}};  // 2004-02-27
  Instant period_end = Instant{std::chrono::seconds{1512950400}};    // 2017-12-11
  SynthFormat format = SynthFormat::yelp_jsonl;

  /// Throws Error for n_users < 10, a fraction outside (0, 0.5), |effect| >= 1,
  /// sum(effect^2) >= 1, negative noise, or an empty period.
  void validate() const;

  static SynthConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct TruthRow {
  std::string user_id;
  double latent_attitude = 0.0;  ///< noise-free
  Bias bias = Bias::normal;

  bool operator==(const TruthRow&) const = default;
};

using TruthTable = std::vector<TruthRow>;

/// Latent draws of one user; shared by planted_truth and generate_population.
struct SynthUser {
  std::string user_id;
  std::int64_t posts = 0;
  std::int64_t lifespan_days = 0;
  std::int64_t friends = 0;
  std::int64_t followers = 0;
  double latent = 0.0;
  double target_attitude = 0.0;  ///< latent + noise, what the texts aim for
  Bias bias = Bias::normal;
};

/// Draws every user's latent quantities from the seed alone.
std::vector<SynthUser> draw_population(const SynthConfig& cfg);

/// Truth labels without writing any files.
TruthTable planted_truth(const SynthConfig& cfg);

struct SynthOutput {
  std::filesystem::path users_path;
  std::filesystem::path posts_path;
  std::filesystem::path truth_path;
  std::filesystem::path lexicon_path;
  std::filesystem::path config_path;  ///< ready-to-run pipeline config
  FieldMap field_map;
  TruthTable truth;
  std::size_t total_posts = 0;
};

/// Writes dataset files, the truth table, a copy of the lexicon and a
/// pipeline config into `out_dir`. Post texts use the lexicon's polarized
/// terms plus neutral filler.
SynthOutput generate_population(const SynthConfig& cfg, const Lexicon& lexicon, const std::filesystem::path& out_dir);

/// Builds one sentence whose score under `lexicon` is close to `target`.
std::string synth_post_text(double target, const Lexicon& lexicon, Rng& rng);

/// Field map matching the files generate_population writes for `format`.
FieldMap synth_field_map(SynthFormat format, bool include_followers);

void write_truth_csv(const std::filesystem::path& path, const TruthTable& truth);

}  // namespace biasdetect
