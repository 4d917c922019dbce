#include "biasdetect/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <sstream>

#include "biasdetect/csv.hpp"
#include "biasdetect/io.hpp"
#include "biasdetect/rng.hpp"

namespace biasdetect {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

const nlohmann::json& require(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) {
    throw Error("config: missing required key '" + where + key + "'");
  }
  return j.at(key);
}

std::string opt_time(const std::optional<Instant>& t) { return t ? format_instant(*t) : std::string{}; }

std::string opt_int(const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : std::string{}; }

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  try {
    PipelineConfig c;
    const auto& ds = require(j, "dataset", "");
    c.posts_path = resolve(base_dir, require(ds, "posts", "dataset.").get<std::string>());
    if (ds.contains("users") && !ds.at("users").is_null()) {
      c.users_path = resolve(base_dir, ds.at("users").get<std::string>());
    }
    if (ds.contains("field_map")) {
      c.field_map = FieldMap::from_json(ds.at("field_map"));
    } else if (ds.contains("field_map_file")) {
      const auto path = resolve(base_dir, ds.at("field_map_file").get<std::string>());
      const auto doc = nlohmann::json::parse(read_file(path), nullptr, false);
      if (doc.is_discarded()) throw Error("config: field map file " + path.string() + " is not valid JSON");
      c.field_map = FieldMap::from_json(doc);
    } else {
      throw Error("config: missing required key 'dataset.field_map'");
    }
    c.field_map.validate_for_posts();
    if (c.users_path) c.field_map.validate_for_users();
    if (ds.contains("end")) {
      const auto text = ds.at("end").get<std::string>();
      c.dataset_end = parse_instant(text, "%Y-%m-%d %H:%M:%S");
      if (!c.dataset_end) c.dataset_end = parse_instant(text, "%Y-%m-%d");
      if (!c.dataset_end) throw Error("config: dataset.end '" + text + "' is not YYYY-MM-DD[ HH:MM:SS]");
    }
    if (ds.contains("subsample")) c.subsample = ds.at("subsample").get<std::size_t>();
    c.subsample_seed = ds.value("subsample_seed", c.subsample_seed);

    c.lexicon_path = resolve(base_dir, require(j, "lexicon", "").get<std::string>());

    if (j.contains("attitude")) {
      const auto& a = j.at("attitude");
      c.k = a.value("k", c.k);
      if (!(c.k > 0)) throw Error("config: attitude.k must be positive");
      const auto mode = a.value("mode", std::string("sum"));
      if (mode == "sum") {
        c.attitude_mode = AttitudeMode::sum;
      } else if (mode == "mean") {
        c.attitude_mode = AttitudeMode::mean;
      } else {
        throw Error("config: attitude.mode must be 'sum' or 'mean'");
      }
      c.histogram_bins = a.value("histogram_bins", c.histogram_bins);
      if (c.histogram_bins < 1) throw Error("config: attitude.histogram_bins must be at least 1");
    }
    if (j.contains("correlation")) {
      const auto& r = j.at("correlation");
      c.method = parse_method(r.value("method", std::string("spearman")));
      if (r.contains("subsets")) {
        c.subsets.clear();
        for (const auto& s : r.at("subsets")) c.subsets.push_back(parse_subset(s.get<std::string>()));
      }
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      c.train = TrainConfig::from_json(t);
      c.balance = t.value("balance", c.balance);
      if (t.contains("hidden_candidates")) {
        c.hidden_candidates = t.at("hidden_candidates").get<std::vector<std::vector<std::size_t>>>();
      }
    }
    if (j.contains("split")) {
      c.test_ratio = j.at("split").value("test_ratio", c.test_ratio);
      c.split_seed = j.at("split").value("seed", c.split_seed);
      if (!(c.test_ratio > 0 && c.test_ratio < 1)) throw Error("config: split.test_ratio must be in (0, 1)");
    }
    const auto target = j.value("target", std::string("biased"));
    if (target == "biased") {
      c.target = Target::biased;
    } else if (target == "among_biased") {
      c.target = Target::among_biased;
    } else {
      throw Error("config: target must be 'biased' or 'among_biased'");
    }
    c.output_dir = resolve(base_dir, j.value("output_dir", std::string("out")));
    if (j.contains("model")) c.model_path = resolve(base_dir, j.at("model").get<std::string>());
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  const auto doc = nlohmann::json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw Error("config: " + path.string() + " is not valid JSON");
  return from_json(doc, std::filesystem::absolute(path).parent_path());
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j;
  j["dataset"]["posts"] = posts_path.string();
  if (users_path) j["dataset"]["users"] = users_path->string();
  j["dataset"]["field_map"] = field_map.to_json();
  if (dataset_end) j["dataset"]["end"] = format_instant(*dataset_end);
  if (subsample) {
    j["dataset"]["subsample"] = *subsample;
    j["dataset"]["subsample_seed"] = subsample_seed;
  }
  j["lexicon"] = lexicon_path.string();
  j["attitude"] = {{"k", k},
                   {"mode", attitude_mode == AttitudeMode::sum ? "sum" : "mean"},
                   {"histogram_bins", histogram_bins}};
  nlohmann::json subs = nlohmann::json::array();
  for (auto s : subsets) subs.push_back(std::string(to_string(s)));
  j["correlation"] = {{"method", std::string(to_string(method))}, {"subsets", subs}};
  j["train"] = train.to_json();
  j["train"]["balance"] = balance;
  if (!hidden_candidates.empty()) j["train"]["hidden_candidates"] = hidden_candidates;
  j["split"] = {{"test_ratio", test_ratio}, {"seed", split_seed}};
  j["target"] = target == Target::biased ? "biased" : "among_biased";
  j["output_dir"] = output_dir.string();
  if (model_path) j["model"] = model_path->string();
  return j;
}

IngestOutcome run_ingest(const PipelineConfig& cfg) {
  IngestOutcome out;
  std::vector<UserRow> rows;
  if (cfg.users_path) {
    auto users = read_users(*cfg.users_path, cfg.field_map);
    rows = std::move(users.records);
    out.user_tally = users.tally;
  }
  auto posts = read_posts(cfg.posts_path, cfg.field_map);
  out.post_tally = posts.tally;
  out.users = build_user_table(rows, posts.records);
  if (cfg.subsample) {
    out.users = subsample_users(out.users, *cfg.subsample, cfg.subsample_seed);
    std::erase_if(posts.records, [&](const RawPost& p) { return out.users.count(p.author_id) == 0; });
  }
  out.posts = std::move(posts.records);
  return out;
}

std::vector<PostScore> run_score(const PipelineConfig&, IngestOutcome& ingest, const Lexicon& lexicon) {
  auto& posts = ingest.posts;
  std::sort(posts.begin(), posts.end(), [](const RawPost& a, const RawPost& b) {
    return std::tie(a.author_id, a.timestamp, a.text) < std::tie(b.author_id, b.timestamp, b.text);
  });
  std::vector<PostScore> scores;
  scores.reserve(posts.size());
  for (auto& [id, user] : ingest.users) user.sentiment_scores.clear();
  for (const auto& p : posts) {
    const double s = score_text(p.text, lexicon);
    scores.push_back(PostScore{p.author_id, p.timestamp, s});
    ingest.users.at(p.author_id).sentiment_scores.push_back(s);
  }
  return scores;
}

LabelOutcome run_label(const PipelineConfig& cfg, const UserTable& users) {
  LabelOutcome out;
  std::vector<double> values;
  for (const auto& [id, user] : users) {
    AttitudeRecord rec;
    rec.user_id = id;
    rec.attitude = aggregate_attitude(user.sentiment_scores, cfg.attitude_mode);
    rec.polarity = classify_polarity(rec.attitude);
    out.attitudes.push_back(rec);
    values.push_back(rec.attitude);
  }
  out.stats = fit_stats(values, cfg.k);
  for (auto& rec : out.attitudes) rec.bias = label_bias(rec.attitude, out.stats);
  out.histogram = histogram(values, cfg.histogram_bins);
  return out;
}

FeatureOutcome run_features(const PipelineConfig& cfg, const UserTable& users, const LabelOutcome& labels) {
  FeatureOutcome out;
  if (cfg.dataset_end) {
    out.dataset_end = *cfg.dataset_end;
  } else {
    std::optional<Instant> latest;
    for (const auto& [id, u] : users) {
      if (u.last_post_at && (!latest || *u.last_post_at > *latest)) latest = u.last_post_at;
    }
    if (!latest) throw Error("no dataset end configured and no post timestamps to infer it from");
    out.dataset_end = *latest;
  }
  std::size_t i = 0;
  for (const auto& [id, user] : users) {
    out.vectors.push_back(extract_features(user, labels.attitudes.at(i++), out.dataset_end, &out.tally));
  }
  out.normalizer = normalize_features(out.vectors);
  return out;
}

CorrelationOutcome run_correlate(const PipelineConfig& cfg, const FeatureOutcome& features) {
  CorrelationOutcome out;
  for (auto subset : cfg.subsets) {
    try {
      out.matrices.push_back(correlation_matrix(features.vectors, cfg.method, subset));
    } catch (const Error& e) {
      out.skipped.emplace_back(subset, e.what());
    }
  }
  return out;
}

std::vector<FeatureVector> training_population(const PipelineConfig& cfg, const FeatureOutcome& features) {
  if (cfg.target == Target::biased) return features.vectors;
  std::vector<FeatureVector> pop;
  for (const auto& v : features.vectors) {
    if (v.bias == Bias::normal) continue;
    FeatureVector copy = v;
    copy.label = v.bias == Bias::overly_positive ? 1 : 0;
    pop.push_back(std::move(copy));
  }
  return pop;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_population(const PipelineConfig& cfg,
                                                                               std::span<const FeatureVector> pop) {
  std::vector<int> labels;
  labels.reserve(pop.size());
  for (const auto& v : pop) labels.push_back(v.label);
  return stratified_split(labels, cfg.test_ratio, cfg.split_seed);
}

TrainOutcome run_train(const PipelineConfig& cfg, const FeatureOutcome& features) {
  const auto pop = training_population(cfg, features);
  auto [train_idx, test_idx] = split_population(cfg, pop);
  if (cfg.balance) {
    std::vector<int> labels;
    for (const auto& v : pop) labels.push_back(v.label);
    train_idx = undersample_majority(train_idx, labels, mix_seed(cfg.split_seed, 2));
  }
  std::vector<Example> examples;
  TrainOutcome out;
  for (auto i : train_idx) {
    examples.push_back(Example{pop[i].normalized, static_cast<double>(pop[i].label)});
    out.train_positive += pop[i].label == 1;
  }
  out.train_size = examples.size();

  TrainConfig tc = cfg.train;
  if (!cfg.hidden_candidates.empty()) tc.hidden = select_hidden(examples, cfg.hidden_candidates, tc);
  out.hidden = tc.hidden;
  auto result = train(std::span<const Example>(examples), tc);
  out.model.network = std::move(result.network);
  out.model.normalizer = features.normalizer;
  out.model.class_threshold = tc.class_threshold;
  out.history = std::move(result.history);
  out.restart_sse = std::move(result.restart_sse);
  return out;
}

EvalOutcome run_evaluate(const PipelineConfig& cfg, const FeatureOutcome& features, const Model& model) {
  const auto pop = training_population(cfg, features);
  const auto [train_idx, test_idx] = split_population(cfg, pop);
  if (test_idx.empty()) throw Error("held-out split is empty");
  EvalOutcome out;
  std::vector<std::vector<double>> inputs;
  for (auto i : test_idx) {
    const auto& v = pop[i];
    const auto pred = predict(model.network, v.normalized, model.class_threshold);
    out.test_ids.push_back(v.user_id);
    out.observed.push_back(v.label);
    out.predicted.push_back(pred.label);
    out.probability.push_back(pred.probability);
    inputs.push_back(v.normalized);
  }
  out.counts = contingency(out.predicted, out.observed, false);
  out.percent = contingency(out.predicted, out.observed, true);
  out.balanced_accuracy = accuracy(out.percent);
  out.plain_accuracy = accuracy(out.counts);
  out.gw = generalized_weights(model.network, std::span<const std::vector<double>>(inputs));
  out.gw_summary = summarize_gw(out.gw, model.normalizer.names);
  return out;
}

namespace {

using Row = std::vector<std::string>;

void write_csv(const std::filesystem::path& path, const Row& header, const std::vector<Row>& rows,
               RunSummary& summary) {
  write_atomically(path, [&](std::ostream& out) {
    csv::write_row(out, header);
    for (const auto& r : rows) csv::write_row(out, r);
  });
  summary.artifacts.push_back(path);
}

std::string tally_line(const char* what, const IngestTally& t) {
  std::ostringstream s;
  s << what << ": records=" << t.records << " accepted=" << t.accepted << " skipped=" << t.skipped()
    << " (malformed=" << t.malformed << " bad_timestamp=" << t.bad_timestamp << " out_of_period=" << t.out_of_period
    << ")\n";
  return s.str();
}

std::string now_utc() {
  const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  return format_instant(Instant{now.time_since_epoch()});
}

}  // namespace

bool is_pipeline_command(std::string_view command) {
  for (const char* c : {"ingest", "score", "label", "correlate", "train", "evaluate", "pipeline"}) {
    if (command == c) return true;
  }
  return false;
}

RunSummary run_command(std::string_view command, const PipelineConfig& cfg) {
  if (!is_pipeline_command(command)) throw Error("unknown subcommand '" + std::string(command) + "'");
  const bool all = command == "pipeline";
  const bool need_score = command != "ingest";
  const bool need_label = need_score && command != "score";
  const bool need_features = need_label && command != "label";

  stage("setup", [&] {
    auto need = [](const char* role, const std::filesystem::path& p) {
      if (!std::filesystem::exists(p)) throw Error(std::string("missing ") + role + " file " + p.string());
    };
    need("posts", cfg.posts_path);
    need("lexicon", cfg.lexicon_path);
    if (cfg.users_path) need("users", *cfg.users_path);
    std::filesystem::create_directories(cfg.output_dir);
    return 0;
  });

  RunSummary summary;
  std::ostringstream report;
  report << "biasdetect run report\n";
  report << "generated: " << now_utc() << "\n";
  report << "command: " << command << "\n\n[config]\n" << cfg.to_json().dump(2) << "\n";
  const auto& dir = cfg.output_dir;

  auto ingest = stage("ingest", [&] { return run_ingest(cfg); });
  summary.n_users = ingest.users.size();
  summary.n_posts = ingest.posts.size();
  report << "\n[ingest]\n" << tally_line("users", ingest.user_tally) << tally_line("posts", ingest.post_tally);
  report << "user table: " << ingest.users.size() << " users, " << ingest.posts.size() << " posts\n";
  if (command == "ingest" || all) {
    std::vector<Row> rows;
    for (const auto& [id, u] : ingest.users) {
      rows.push_back({id, std::to_string(u.post_count), std::to_string(u.friends_count), opt_int(u.followers_count),
                      opt_time(u.created_at), opt_time(u.first_post_at), opt_time(u.last_post_at)});
    }
    write_csv(dir / "users.csv",
              {"user_id", "post_count", "friends_count", "followers_count", "created_at", "first_post_at",
               "last_post_at"},
              rows, summary);
  }

  if (need_score) {
    const auto scores = stage("score", [&] {
      const Lexicon lexicon = load_lexicon(cfg.lexicon_path);
      report << "\n[score]\nlexicon: " << lexicon.entries.size() << " terms, " << lexicon.negators.size()
             << " negators, " << lexicon.duplicate_warnings << " duplicate warnings\n";
      return run_score(cfg, ingest, lexicon);
    });
    if (command == "score" || all) {
      std::vector<Row> rows;
      for (const auto& s : scores) rows.push_back({s.author_id, format_instant(s.timestamp), format_real(s.score)});
      write_csv(dir / "scores.csv", {"author_id", "timestamp", "score"}, rows, summary);
    }
  }

  std::optional<LabelOutcome> labels;
  if (need_label) {
    labels = stage("label", [&] { return run_label(cfg, ingest.users); });
    std::size_t normal = 0, pos = 0, neg = 0;
    for (const auto& a : labels->attitudes) {
      normal += a.bias == Bias::normal;
      pos += a.bias == Bias::overly_positive;
      neg += a.bias == Bias::overly_negative;
    }
    summary.stats = labels->stats;
    summary.fraction_normal = static_cast<double>(normal) / static_cast<double>(labels->attitudes.size());
    report << "\n[label]\nmean=" << format_real(labels->stats.mean) << " std_dev=" << format_real(labels->stats.std_dev)
           << " k=" << format_real(labels->stats.k) << " n_users=" << labels->stats.n_users << "\n"
           << "normal=" << normal << " overly_positive=" << pos << " overly_negative=" << neg
           << " fraction_normal=" << format_real(summary.fraction_normal) << "\n";
    if (command == "label" || all) {
      std::vector<Row> rows;
      for (const auto& a : labels->attitudes) {
        rows.push_back({a.user_id, format_real(a.attitude), std::string(to_string(a.polarity)),
                        std::string(to_string(a.bias))});
      }
      write_csv(dir / "attitudes.csv", {"user_id", "attitude", "polarity", "bias"}, rows, summary);
      rows.clear();
      for (const auto& b : labels->histogram) {
        rows.push_back({format_real(b.low), format_real(b.high), std::to_string(b.count)});
      }
      write_csv(dir / "histogram.csv", {"bin_low", "bin_high", "count"}, rows, summary);
    }
  }

  if (!need_features) {
    write_atomically(dir / "report.txt", [&](std::ostream& out) { out << report.str(); });
    summary.artifacts.push_back(dir / "report.txt");
    return summary;
  }

  const auto features = stage("features", [&] { return run_features(cfg, ingest.users, *labels); });
  report << "\n[features]\ndataset_end=" << format_instant(features.dataset_end)
         << " inputs=" << features.normalizer.names.size() << " no_lifespan_anchor=" << features.tally.no_anchor
         << " anchor_after_end=" << features.tally.anchor_after_end << "\n";
  for (std::size_t i = 0; i < features.normalizer.names.size(); ++i) {
    report << "  " << features.normalizer.names[i] << ": min=" << format_real(features.normalizer.min[i])
           << " max=" << format_real(features.normalizer.max[i]) << "\n";
  }

  if (command == "correlate" || all) {
    const auto corr = stage("correlate", [&] { return run_correlate(cfg, features); });
    std::vector<Row> rows;
    const auto& names = features.normalizer.names;
    for (const auto& v : features.vectors) {
      Row r{v.user_id, std::to_string(v.nr), format_real(v.li), std::to_string(v.nfr), opt_int(v.nfo),
            format_real(v.s_score), std::string(to_string(v.bias)), std::to_string(v.label)};
      for (double x : v.normalized) r.push_back(format_real(x));
      rows.push_back(std::move(r));
    }
    Row header{"user_id", "nr", "li", "nfr", "nfo", "s_score", "bias", "label"};
    for (const auto& n : names) header.push_back(n + "_norm");
    write_csv(dir / "features.csv", header, rows, summary);

    report << "\n[correlate]\nmethod=" << to_string(cfg.method) << "\n";
    for (const auto& m : corr.matrices) {
      std::vector<Row> cells;
      for (std::size_t i = 0; i < m.names.size(); ++i) {
        Row r;
        for (std::size_t j = 0; j < m.names.size(); ++j) r.push_back(format_optional(m.at(i, j)));
        cells.push_back(std::move(r));
      }
      // Matrices come out in cfg.subsets order minus the skipped ones.
      const auto subset_name = [&] {
        std::size_t seen = 0;
        for (auto s : cfg.subsets) {
          const bool skipped = std::any_of(corr.skipped.begin(), corr.skipped.end(),
                                           [&](const auto& p) { return p.first == s; });
          if (skipped) continue;
          if (&corr.matrices[seen] == &m) return std::string(to_string(s));
          ++seen;
        }
        return std::string("unknown");
      }();
      write_csv(dir / ("correlation_" + std::string(to_string(cfg.method)) + "_" + subset_name + ".csv"), m.names,
                cells, summary);
      report << "subset " << subset_name << ": n=" << m.n_users << "\n";
    }
    for (const auto& [s, why] : corr.skipped) report << "subset " << to_string(s) << ": skipped (" << why << ")\n";
  }

  std::optional<Model> model;
  if (command == "train" || all) {
    auto trained = stage("train", [&] { return run_train(cfg, features); });
    trained.model.save(dir / "model.json");
    summary.artifacts.push_back(dir / "model.json");
    std::vector<Row> rows;
    for (std::size_t e = 0; e < trained.history.sse.size(); ++e) {
      rows.push_back({std::to_string(e + 1), format_real(trained.history.sse[e])});
    }
    write_csv(dir / "history.csv", {"epoch", "sse"}, rows, summary);
    report << "\n[train]\ntarget=" << (cfg.target == Target::biased ? "biased" : "among_biased")
           << " train_size=" << trained.train_size << " train_positive=" << trained.train_positive << " hidden=[";
    for (std::size_t i = 0; i < trained.hidden.size(); ++i) report << (i ? "," : "") << trained.hidden[i];
    report << "] epochs=" << trained.history.epochs_run << " stop=" << to_string(trained.history.stop_reason)
           << " final_sse=" << format_real(trained.history.sse.back()) << "\n";
    model = std::move(trained.model);
  }

  if (command == "evaluate" || all) {
    if (!model) {
      const auto path = cfg.model_path.value_or(dir / "model.json");
      model = stage("evaluate", [&] { return Model::load(path, features.normalizer.names); });
    }
    const auto ev = stage("evaluate", [&] { return run_evaluate(cfg, features, *model); });
    summary.balanced_accuracy = ev.balanced_accuracy;
    summary.plain_accuracy = ev.plain_accuracy;
    std::vector<Row> rows;
    const char* cls[] = {"Neg", "Pos"};
    for (const auto* m : {&ev.counts, &ev.percent}) {
      for (int o = 0; o < 2; ++o) {
        rows.push_back({m->row_normalized ? "percent" : "count", cls[o], format_real(m->cells[o][0]),
                        format_real(m->cells[o][1])});
      }
    }
    write_csv(dir / "contingency.csv", {"mode", "observed", "predicted_neg", "predicted_pos"}, rows, summary);
    write_csv(dir / "accuracy.csv", {"metric", "value"},
              {{"balanced_on_row_percent", format_real(ev.balanced_accuracy)},
               {"plain_on_counts", format_real(ev.plain_accuracy)}},
              summary);
    rows.clear();
    for (std::size_t i = 0; i < ev.test_ids.size(); ++i) {
      rows.push_back({ev.test_ids[i], std::to_string(ev.observed[i]), std::to_string(ev.predicted[i]),
                      format_real(ev.probability[i])});
    }
    write_csv(dir / "predictions.csv", {"user_id", "observed", "predicted", "probability"}, rows, summary);
    rows.clear();
    for (std::size_t i = 0; i < ev.gw.size(); ++i) {
      Row r{ev.test_ids[i]};
      for (double g : ev.gw[i]) r.push_back(format_real(g));
      rows.push_back(std::move(r));
    }
    Row gw_header{"user_id"};
    for (const auto& n : model->normalizer.names) gw_header.push_back(n);
    write_csv(dir / "gw.csv", gw_header, rows, summary);
    rows.clear();
    for (const auto& s : ev.gw_summary) {
      rows.push_back({s.feature, format_real(s.min), format_real(s.median), format_real(s.max)});
    }
    write_csv(dir / "gw_summary.csv", {"feature", "min", "median", "max"}, rows, summary);

    report << "\n[evaluate]\nheld_out=" << ev.test_ids.size() << "\n"
           << "contingency (percent of observed row):\n"
           << "  Neg: " << format_real(ev.percent.cells[0][0]) << " " << format_real(ev.percent.cells[0][1]) << "\n"
           << "  Pos: " << format_real(ev.percent.cells[1][0]) << " " << format_real(ev.percent.cells[1][1]) << "\n"
           << "accuracy, (TP+TN)/(TP+TN+FP+FN) on row percentages (balanced): "
           << format_real(ev.balanced_accuracy) << "%\n"
           << "accuracy, correct/total on counts (plain): " << format_real(ev.plain_accuracy) << "%\n"
           << "generalized weights (min / median / max):\n";
    for (const auto& s : ev.gw_summary) {
      report << "  " << s.feature << ": " << format_real(s.min) << " / " << format_real(s.median) << " / "
             << format_real(s.max) << "\n";
    }
  }

  write_atomically(dir / "report.txt", [&](std::ostream& out) { out << report.str(); });
  summary.artifacts.push_back(dir / "report.txt");
  return summary;
}

}  // namespace biasdetect
