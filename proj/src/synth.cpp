#include "biasdetect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "biasdetect/csv.hpp"
#include "biasdetect/error.hpp"
#include "biasdetect/io.hpp"

namespace biasdetect {

namespace {

constexpr const char* kFeatureKeys[] = {"nr", "li", "nfr", "nfo"};

constexpr const char* kFiller[] = {
    "the",    "food",   "service", "place", "staff",  "menu",   "table", "we",      "ordered", "was",
    "and",    "our",    "server",  "dish",  "dinner", "lunch",  "room",  "price",   "waiter",  "drinks",
    "visit",  "night",  "coffee",  "pizza", "salad",  "burger", "it",    "they",    "there",   "again",
    "also",   "came",   "with",    "after", "town",   "street", "hotel", "weekend", "family",  "friends"};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::int64_t lognormal_count(double log_mean, double log_sd, double z) {
  return static_cast<std::int64_t>(std::llround(std::exp(log_mean + log_sd * z)));
}

std::string pad_id(char prefix, std::size_t i, std::size_t n) {
  const std::size_t width = std::to_string(n).size();
  std::string digits = std::to_string(i);
  return std::string(1, prefix) + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

struct Vocabulary {
  // Sorted by |polarity| descending, then term, for deterministic picks.
  std::vector<std::pair<std::string, double>> positive;
  std::vector<std::pair<std::string, double>> negative;
  std::vector<std::string> filler;
};

bool plain_token(const std::string& t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z');
         });
}

Vocabulary build_vocabulary(const Lexicon& lex) {
  Vocabulary v;
  for (const auto& [term, p] : lex.entries) {
    if (p == 0.0 || lex.is_negator(term) || !plain_token(term)) continue;
    (p > 0 ? v.positive : v.negative).emplace_back(term, std::abs(p));
  }
  auto order = [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; };
  std::sort(v.positive.begin(), v.positive.end(), order);
  std::sort(v.negative.begin(), v.negative.end(), order);
  for (const char* w : kFiller) {
    if (lex.entries.count(w) == 0 && !lex.is_negator(w)) v.filler.emplace_back(w);
  }
  if (v.filler.empty()) throw Error("synth: every filler word is in the lexicon");
  return v;
}

std::string compose(std::vector<std::string> tokens, Rng& rng) {
  rng.shuffle(std::span<std::string>(tokens));
  std::string text;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) text += ' ';
    text += tokens[i];
  }
  if (!text.empty() && text[0] >= 'a' && text[0] <= 'z') text[0] = static_cast<char>(text[0] - 'a' + 'A');
  text += '.';
  return text;
}

std::string encode_post(double target, const Vocabulary& vocab, Rng& rng) {
  std::size_t n = 8 + rng.below(9);
  std::vector<std::string> tokens;
  if (target != 0.0) {
    const auto& words = target > 0 ? vocab.positive : vocab.negative;
    if (words.empty()) throw Error("synth: lexicon has no terms of the needed polarity");
    const double magnitude = std::abs(target);
    const double pmax = words.front().second;
    const double pmin = words.back().second;
    const double ratio = magnitude / pmax;
    n = std::max(n, static_cast<std::size_t>(std::ceil(ratio * ratio)));
    // The sentence scores sum(p) / sqrt(n), so aim the polarity sum at target * sqrt(n).
    double remaining = magnitude * std::sqrt(static_cast<double>(n));
    while (tokens.size() < n && remaining >= pmin / 2) {
      auto it = std::find_if(words.begin(), words.end(), [&](const auto& w) { return w.second <= remaining + pmin / 2; });
      if (it == words.end()) break;
      auto last = std::find_if(it, words.end(), [&](const auto& w) { return w.second != it->second; });
      const auto pick = it + static_cast<std::ptrdiff_t>(rng.below(static_cast<std::uint64_t>(last - it)));
      tokens.push_back(pick->first);
      remaining -= pick->second;
    }
  }
  while (tokens.size() < n) tokens.push_back(vocab.filler[rng.below(vocab.filler.size())]);
  return compose(std::move(tokens), rng);
}

}  // namespace

void SynthConfig::validate() const {
  if (n_users < 10) throw Error("synth: n_users must be at least 10");
  if (!(target_bias_fraction > 0.0 && target_bias_fraction < 0.5)) {
    throw Error("synth: target_bias_fraction must be in (0, 0.5)");
  }
  double total = 0.0;
  for (const auto& [name, e] : effect_sizes) {
    if (std::find(std::begin(kFeatureKeys), std::end(kFeatureKeys), name) == std::end(kFeatureKeys)) {
      throw Error("synth: unknown effect size '" + name + "'");
    }
    if (!(std::abs(e) < 1.0)) throw Error("synth: effect size for " + name + " must satisfy |e| < 1");
    total += e * e;
  }
  if (total >= 1.0) throw Error("synth: effect sizes imply |r| >= 1 jointly (sum of squares >= 1)");
  if (!(noise_sd >= 0.0)) throw Error("synth: noise_sd must be non-negative");
  if (!(bias_jump > 0.0)) throw Error("synth: bias_jump must be positive");
  if (!(post_jitter >= 0.0)) throw Error("synth: post_jitter must be non-negative");
  if (max_posts < 1) throw Error("synth: max_posts must be at least 1");
  if (period_end - period_start < std::chrono::days{2}) throw Error("synth: period must span at least two days");
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  SynthConfig c;
  c.n_users = j.value("n_users", c.n_users);
  c.seed = j.value("seed", c.seed);
  c.target_bias_fraction = j.value("target_bias_fraction", c.target_bias_fraction);
  if (j.contains("effect_sizes")) c.effect_sizes = j.at("effect_sizes").get<std::map<std::string, double>>();
  c.noise_sd = j.value("noise_sd", c.noise_sd);
  c.bias_jump = j.value("bias_jump", c.bias_jump);
  c.posts_log_mean = j.value("posts_log_mean", c.posts_log_mean);
  c.posts_log_sd = j.value("posts_log_sd", c.posts_log_sd);
  c.max_posts = j.value("max_posts", c.max_posts);
  c.friends_log_mean = j.value("friends_log_mean", c.friends_log_mean);
  c.friends_log_sd = j.value("friends_log_sd", c.friends_log_sd);
  c.followers_log_mean = j.value("followers_log_mean", c.followers_log_mean);
  c.followers_log_sd = j.value("followers_log_sd", c.followers_log_sd);
  c.include_followers = j.value("include_followers", c.include_followers);
  c.post_jitter = j.value("post_jitter", c.post_jitter);
  const std::string fmt = "%Y-%m-%d";
  if (j.contains("period_start")) {
    auto t = parse_instant(j.at("period_start").get<std::string>(), fmt);
    if (!t) throw Error("synth: period_start must be YYYY-MM-DD");
    c.period_start = *t;
  }
  if (j.contains("period_end")) {
    auto t = parse_instant(j.at("period_end").get<std::string>(), fmt);
    if (!t) throw Error("synth: period_end must be YYYY-MM-DD");
    c.period_end = *t;
  }
  const auto format = j.value("format", std::string("yelp_jsonl"));
  if (format == "yelp_jsonl") {
    c.format = SynthFormat::yelp_jsonl;
  } else if (format == "tweets_csv") {
    c.format = SynthFormat::tweets_csv;
  } else {
    throw Error("synth: unknown format '" + format + "'");
  }
  c.validate();
  return c;
}

nlohmann::json SynthConfig::to_json() const {
  nlohmann::json j;
  j["n_users"] = n_users;
  j["seed"] = seed;
  j["target_bias_fraction"] = target_bias_fraction;
  j["effect_sizes"] = effect_sizes;
  j["noise_sd"] = noise_sd;
  j["bias_jump"] = bias_jump;
  j["posts_log_mean"] = posts_log_mean;
  j["posts_log_sd"] = posts_log_sd;
  j["max_posts"] = max_posts;
  j["friends_log_mean"] = friends_log_mean;
  j["friends_log_sd"] = friends_log_sd;
  j["followers_log_mean"] = followers_log_mean;
  j["followers_log_sd"] = followers_log_sd;
  j["include_followers"] = include_followers;
  j["post_jitter"] = post_jitter;
  j["period_start"] = format_instant(period_start).substr(0, 10);
  j["period_end"] = format_instant(period_end).substr(0, 10);
  j["format"] = format == SynthFormat::yelp_jsonl ? "yelp_jsonl" : "tweets_csv";
  return j;
}

std::vector<SynthUser> draw_population(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n_users;
  auto effect = [&](const char* key) {
    auto it = cfg.effect_sizes.find(key);
    return it == cfg.effect_sizes.end() ? 0.0 : it->second;
  };
  const double e_nr = effect("nr"), e_li = effect("li"), e_nfr = effect("nfr"), e_nfo = effect("nfo");
  const auto span_days = std::chrono::duration_cast<std::chrono::days>(cfg.period_end - cfg.period_start).count();

  Rng rng(cfg.seed);
  std::vector<SynthUser> users(n);
  std::vector<double> core(n), noise(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z_nr = rng.normal();
    const double z_li = rng.normal();
    const double z_nfr = rng.normal();
    const double z_nfo = rng.normal();
    noise[i] = rng.normal();
    auto& u = users[i];
    u.user_id = pad_id('u', i, n);
    u.posts = std::clamp<std::int64_t>(lognormal_count(cfg.posts_log_mean, cfg.posts_log_sd, z_nr), 1, cfg.max_posts);
    u.lifespan_days = 1 + static_cast<std::int64_t>(std::floor(static_cast<double>(span_days - 1) * normal_cdf(z_li)));
    u.lifespan_days = std::clamp<std::int64_t>(u.lifespan_days, 1, span_days);
    u.friends = lognormal_count(cfg.friends_log_mean, cfg.friends_log_sd, z_nfr);
    u.followers = lognormal_count(cfg.followers_log_mean, cfg.followers_log_sd, z_nfo);
    core[i] = e_nr * z_nr + e_li * z_li + e_nfr * z_nfr + e_nfo * z_nfo;
  }

  // Plant the biased users in both tails of the noise-free latent.
  const double mean = std::accumulate(core.begin(), core.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double c : core) ss += (c - mean) * (c - mean);
  double sd = std::sqrt(ss / static_cast<double>(n));
  if (sd == 0.0) sd = 1.0;
  const auto per_tail = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(cfg.target_bias_fraction * static_cast<double>(n) / 2.0)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return core[a] < core[b]; });
  std::vector<double> latent = core;
  for (std::size_t k = 0; k < per_tail; ++k) {
    latent[order[k]] -= cfg.bias_jump * sd;
    latent[order[n - 1 - k]] += cfg.bias_jump * sd;
  }

  const auto stats = fit_stats(latent, 3.0);
  for (std::size_t i = 0; i < n; ++i) {
    users[i].latent = latent[i];
    users[i].bias = label_bias(latent[i], stats);
    users[i].target_attitude = latent[i] + cfg.noise_sd * noise[i];
  }
  return users;
}

TruthTable planted_truth(const SynthConfig& cfg) {
  TruthTable truth;
  for (const auto& u : draw_population(cfg)) truth.push_back(TruthRow{u.user_id, u.latent, u.bias});
  return truth;
}

std::string synth_post_text(double target, const Lexicon& lexicon, Rng& rng) {
  return encode_post(target, build_vocabulary(lexicon), rng);
}

FieldMap synth_field_map(SynthFormat format, bool include_followers) {
  FieldMap m;
  if (format == SynthFormat::yelp_jsonl) {
    m.source_kind = SourceKind::json_lines;
    m.author_id = "user_id";
    m.text = "text";
    m.timestamp = "date";
    m.user_id = "user_id";
    m.friends_count = "friends";
    if (include_followers) m.followers_count = "followers";
    m.created_at = "yelping_since";
  } else {
    m.source_kind = SourceKind::csv;
    m.author_id = "user_id";
    m.text = "text";
    m.timestamp = "created_at";
    m.user_id = "user_id";
    m.friends_count = "friends_count";
    if (include_followers) m.followers_count = "followers_count";
    m.created_at = "account_created_at";
    m.snapshot_at = "created_at";
  }
  m.timestamp_format = "%Y-%m-%d %H:%M:%S";
  return m;
}

void write_truth_csv(const std::filesystem::path& path, const TruthTable& truth) {
  write_atomically(path, [&](std::ostream& out) {
    csv::write_row(out, {"user_id", "latent_attitude", "bias_label"});
    for (const auto& row : truth) {
      csv::write_row(out, {row.user_id, format_real(row.latent_attitude), std::string(to_string(row.bias))});
    }
  });
}

SynthOutput generate_population(const SynthConfig& cfg, const Lexicon& lexicon, const std::filesystem::path& out_dir) {
  const auto users = draw_population(cfg);
  const Vocabulary vocab = build_vocabulary(lexicon);
  std::filesystem::create_directories(out_dir);

  SynthOutput result;
  result.field_map = synth_field_map(cfg.format, cfg.include_followers);
  result.truth_path = out_dir / "truth.csv";
  result.lexicon_path = out_dir / "lexicon.tsv";
  result.config_path = out_dir / "pipeline.json";
  if (cfg.format == SynthFormat::yelp_jsonl) {
    result.users_path = out_dir / "users.jsonl";
    result.posts_path = out_dir / "reviews.jsonl";
  } else {
    result.users_path = result.posts_path = out_dir / "tweets.csv";
  }

  // Text draws use their own stream so truth depends on the seed alone.
  Rng rng(mix_seed(cfg.seed, 1));
  struct Post {
    std::int64_t when;
    std::string text;
  };
  std::ostringstream users_out, posts_out;
  if (cfg.format == SynthFormat::tweets_csv) {
    std::vector<std::string> header{"status_id", "user_id", "created_at", "text", "friends_count"};
    if (cfg.include_followers) header.push_back("followers_count");
    header.push_back("account_created_at");
    csv::write_row(posts_out, header);
  }
  const std::int64_t end = cfg.period_end.time_since_epoch().count();
  std::size_t post_id = 0;
  for (const auto& u : users) {
    const std::int64_t created = end - u.lifespan_days * 86400;
    const auto m = static_cast<std::size_t>(u.posts);
    std::vector<double> jitter(m);
    double jitter_mean = 0.0;
    for (auto& j : jitter) {
      j = cfg.post_jitter * rng.normal();
      jitter_mean += j;
    }
    jitter_mean /= static_cast<double>(m);
    std::vector<Post> posts(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double target = u.target_attitude / static_cast<double>(m) + jitter[k] - jitter_mean;
      posts[k].when = created + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(end - created)));
      posts[k].text = encode_post(target, vocab, rng);
    }
    std::stable_sort(posts.begin(), posts.end(), [](const Post& a, const Post& b) { return a.when < b.when; });
    const std::string created_text = format_instant(Instant{std::chrono::seconds{created}});

    if (cfg.format == SynthFormat::yelp_jsonl) {
      nlohmann::ordered_json row;
      row["user_id"] = u.user_id;
      row["friends"] = u.friends;
      if (cfg.include_followers) row["followers"] = u.followers;
      row["yelping_since"] = created_text;
      users_out << row.dump() << '\n';
      for (const auto& p : posts) {
        nlohmann::ordered_json r;
        r["review_id"] = pad_id('r', post_id++, 9999999);
        r["user_id"] = u.user_id;
        r["date"] = format_instant(Instant{std::chrono::seconds{p.when}});
        r["text"] = p.text;
        posts_out << r.dump() << '\n';
      }
    } else {
      // Counters grow by one per later tweet, so the latest snapshot holds the final values.
      for (std::size_t k = 0; k < m; ++k) {
        const auto behind = static_cast<std::int64_t>(m - 1 - k);
        std::vector<std::string> row{pad_id('s', post_id++, 9999999), u.user_id,
                                     format_instant(Instant{std::chrono::seconds{posts[k].when}}), posts[k].text,
                                     std::to_string(std::max<std::int64_t>(0, u.friends - behind))};
        if (cfg.include_followers) row.push_back(std::to_string(std::max<std::int64_t>(0, u.followers - behind)));
        row.push_back(created_text);
        csv::write_row(posts_out, row);
      }
    }
    result.total_posts += m;
  }

  if (cfg.format == SynthFormat::yelp_jsonl) {
    write_atomically(result.users_path, [&](std::ostream& out) { out << users_out.str(); });
  }
  write_atomically(result.posts_path, [&](std::ostream& out) { out << posts_out.str(); });

  for (const auto& u : users) result.truth.push_back(TruthRow{u.user_id, u.latent, u.bias});
  write_truth_csv(result.truth_path, result.truth);

  // Lexicon copy in sorted order so the file is byte-stable.
  std::vector<std::pair<std::string, double>> entries(lexicon.entries.begin(), lexicon.entries.end());
  std::sort(entries.begin(), entries.end());
  write_atomically(result.lexicon_path, [&](std::ostream& out) {
    for (const auto& [term, p] : entries) {
      out << term << '\t' << format_real(p);
      if (lexicon.is_negator(term)) out << "\tNEG";
      out << '\n';
    }
  });

  nlohmann::ordered_json config;
  config["dataset"]["users"] = result.users_path.filename().string();
  config["dataset"]["posts"] = result.posts_path.filename().string();
  config["dataset"]["field_map"] = result.field_map.to_json();
  config["dataset"]["end"] = format_instant(cfg.period_end);
  config["lexicon"] = result.lexicon_path.filename().string();
  // A single [4,2] start often settles on one tail only.
  config["train"]["rep"] = 5;
  config["output_dir"] = "out";
  write_atomically(result.config_path, [&](std::ostream& out) { out << config.dump(2) << '\n'; });
  return result;
}

}  // namespace biasdetect
