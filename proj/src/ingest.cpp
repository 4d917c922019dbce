#include "biasdetect/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "biasdetect/error.hpp"
#include "biasdetect/rng.hpp"

namespace biasdetect {

namespace {

std::optional<std::int64_t> parse_count(const std::string& text) {
  std::int64_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec == std::errc{} && ptr == last) {
    if (value < 0) return std::nullopt;
    return value;
  }
  // Some exports write counts as "12.0".
  double real = 0;
  auto [rptr, rec] = std::from_chars(first, last, real);
  if (rec != std::errc{} || rptr != last || real < 0 || std::floor(real) != real) return std::nullopt;
  return static_cast<std::int64_t>(real);
}

std::int64_t count_list(const std::string& text) {
  if (text.empty() || text == "None") return 0;
  std::int64_t n = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    std::string_view item(text.data() + start, comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) ++n;
    start = comma + 1;
  }
  return n;
}

bool blank(const std::optional<std::string>& v) { return !v || v->empty(); }

void check_schema(const IngestTally& tally, const std::string& path) {
  const std::size_t bad = tally.malformed + tally.bad_timestamp;
  if (tally.records > 0 && 2 * bad > tally.records) {
    throw SchemaMismatch("schema mismatch: " + std::to_string(bad) + " of " +
                         std::to_string(tally.records) + " records in " + path +
                         " could not be mapped");
  }
}

std::optional<Instant> parse_time_field(const nlohmann::json& j, const char* key,
                                        const std::string& format) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto text = j.at(key).get<std::string>();
  auto t = parse_instant(text, format);
  if (!t) throw Error(std::string("field map: cannot parse ") + key + " '" + text + "'");
  return t;
}

}  // namespace

void FieldMap::validate_for_posts() const {
  if (author_id.empty()) throw Error("field map: post field 'author_id' is not mapped");
  if (text.empty()) throw Error("field map: post field 'text' is not mapped");
  if (timestamp.empty()) throw Error("field map: post field 'timestamp' is not mapped");
}

void FieldMap::validate_for_users() const {
  if (user_id.empty()) throw Error("field map: user field 'user_id' is not mapped");
}

FieldMap FieldMap::from_json(const nlohmann::json& j) {
  FieldMap m;
  const auto kind = j.value("source_kind", std::string("json_lines"));
  if (kind == "json_lines") {
    m.source_kind = SourceKind::json_lines;
  } else if (kind == "csv") {
    m.source_kind = SourceKind::csv;
  } else {
    throw Error("field map: unknown source_kind '" + kind + "'");
  }
  if (j.contains("post_fields")) {
    const auto& p = j.at("post_fields");
    m.author_id = p.value("author_id", "");
    m.text = p.value("text", "");
    m.timestamp = p.value("timestamp", "");
  }
  if (j.contains("user_fields")) {
    const auto& u = j.at("user_fields");
    m.user_id = u.value("user_id", "");
    m.friends_count = u.value("friends_count", "");
    m.followers_count = u.value("followers_count", "");
    m.created_at = u.value("created_at", "");
    m.snapshot_at = u.value("snapshot_at", "");
  }
  m.friends_is_list = j.value("friends_is_list", false);
  m.timestamp_format = j.value("timestamp_format", m.timestamp_format);
  m.user_timestamp_format = j.value("user_timestamp_format", "");
  m.period_start = parse_time_field(j, "period_start", m.timestamp_format);
  m.period_end = parse_time_field(j, "period_end", m.timestamp_format);
  return m;
}

nlohmann::json FieldMap::to_json() const {
  nlohmann::json j;
  j["source_kind"] = source_kind == SourceKind::csv ? "csv" : "json_lines";
  j["post_fields"] = {{"author_id", author_id}, {"text", text}, {"timestamp", timestamp}};
  j["user_fields"] = {{"user_id", user_id},
                      {"friends_count", friends_count},
                      {"followers_count", followers_count},
                      {"created_at", created_at},
                      {"snapshot_at", snapshot_at}};
  j["friends_is_list"] = friends_is_list;
  j["timestamp_format"] = timestamp_format;
  if (!user_timestamp_format.empty()) j["user_timestamp_format"] = user_timestamp_format;
  if (period_start) j["period_start"] = format_instant(*period_start);
  if (period_end) j["period_end"] = format_instant(*period_end);
  return j;
}

namespace detail {

RecordSource::RecordSource(const std::filesystem::path& path, SourceKind kind)
    : kind_(kind), in_(path, std::ios::binary) {
  if (!in_) throw Error("cannot read " + path.string());
  if (kind_ == SourceKind::csv) {
    csv_ = std::make_unique<csv::Reader>(in_);
    std::vector<std::string> names;
    bool ok = true;
    if (csv_->next(names, ok)) {
      if (!names.empty() && names[0].starts_with("\xEF\xBB\xBF")) names[0].erase(0, 3);
      for (std::size_t i = 0; i < names.size(); ++i) header_.emplace(names[i], i);
    }
  }
}

bool RecordSource::next(Record& out) {
  out.well_formed = true;
  out.cells.clear();
  out.object = nullptr;
  out.header = nullptr;
  if (kind_ == SourceKind::json_lines) {
    std::string line;
    while (std::getline(in_, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      out.object = nlohmann::json::parse(line, nullptr, false);
      out.well_formed = !out.object.is_discarded() && out.object.is_object();
      return true;
    }
    return false;
  }
  while (csv_->next(out.cells, out.well_formed)) {
    if (out.cells.size() == 1 && out.cells[0].empty() && header_.size() != 1) continue;
    out.header = &header_;
    if (out.cells.size() != header_.size()) out.well_formed = false;
    return true;
  }
  return false;
}

std::optional<std::string> RecordSource::Record::get(const std::string& key) const {
  if (key.empty()) return std::nullopt;
  if (header != nullptr) {
    auto it = header->find(key);
    if (it == header->end() || it->second >= cells.size()) return std::nullopt;
    return cells[it->second];
  }
  const nlohmann::json* node = &object;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object()) return std::nullopt;
    auto it = node->find(part);
    if (it == node->end()) return std::nullopt;
    node = &*it;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_null()) return std::nullopt;
  if (node->is_string()) return node->get<std::string>();
  if (node->is_number_integer() || node->is_number_unsigned() || node->is_boolean()) return node->dump();
  if (node->is_number_float()) {
    const double v = node->get<double>();
    if (std::floor(v) == v && std::abs(v) < 9e15) return std::to_string(static_cast<std::int64_t>(v));
    return node->dump();
  }
  return node->dump();
}

}  // namespace detail

PostStream::PostStream(const std::filesystem::path& path, FieldMap map)
    : source_(path, map.source_kind), map_(std::move(map)), path_(path.string()) {
  map_.validate_for_posts();
}

std::optional<RawPost> PostStream::next() {
  detail::RecordSource::Record rec;
  while (source_.next(rec)) {
    ++tally_.records;
    auto author = rec.get(map_.author_id);
    auto text = rec.get(map_.text);
    if (!rec.well_formed || blank(author) || !text) {
      ++tally_.malformed;
      continue;
    }
    auto raw_ts = rec.get(map_.timestamp);
    std::optional<Instant> ts;
    if (raw_ts) ts = parse_instant(*raw_ts, map_.timestamp_format);
    if (!ts) {
      ++tally_.bad_timestamp;
      continue;
    }
    if ((map_.period_start && *ts < *map_.period_start) || (map_.period_end && *ts > *map_.period_end)) {
      ++tally_.out_of_period;
      continue;
    }
    ++tally_.accepted;
    return RawPost{std::move(*author), std::move(*text), *ts};
  }
  check_schema(tally_, path_);
  return std::nullopt;
}

UserStream::UserStream(const std::filesystem::path& path, FieldMap map)
    : source_(path, map.source_kind), map_(std::move(map)), path_(path.string()) {
  map_.validate_for_users();
}

std::optional<UserRow> UserStream::next() {
  detail::RecordSource::Record rec;
  while (source_.next(rec)) {
    ++tally_.records;
    auto id = rec.get(map_.user_id);
    if (!rec.well_formed || blank(id)) {
      ++tally_.malformed;
      continue;
    }
    UserRow row;
    row.user_id = std::move(*id);

    bool ok = true;
    if (auto friends = rec.get(map_.friends_count); !blank(friends)) {
      if (map_.friends_is_list) {
        row.friends_count = count_list(*friends);
      } else if (auto n = parse_count(*friends)) {
        row.friends_count = *n;
      } else {
        ok = false;
      }
    }
    if (auto followers = rec.get(map_.followers_count); !blank(followers)) {
      if (auto n = parse_count(*followers)) {
        row.followers_count = *n;
      } else {
        ok = false;
      }
    }
    if (!ok) {
      ++tally_.malformed;
      continue;
    }

    bool times_ok = true;
    if (auto created = rec.get(map_.created_at); !blank(created)) {
      row.created_at = parse_instant(*created, map_.user_format());
      times_ok = times_ok && row.created_at.has_value();
    }
    if (auto seen = rec.get(map_.snapshot_at); !blank(seen)) {
      row.snapshot_at = parse_instant(*seen, map_.user_format());
      times_ok = times_ok && row.snapshot_at.has_value();
    }
    if (!times_ok) {
      ++tally_.bad_timestamp;
      continue;
    }
    ++tally_.accepted;
    return row;
  }
  check_schema(tally_, path_);
  return std::nullopt;
}

IngestResult<RawPost> read_posts(const std::filesystem::path& path, const FieldMap& map) {
  PostStream stream(path, map);
  IngestResult<RawPost> result;
  while (auto post = stream.next()) result.records.push_back(std::move(*post));
  result.tally = stream.tally();
  return result;
}

IngestResult<UserRow> read_users(const std::filesystem::path& path, const FieldMap& map) {
  UserStream stream(path, map);
  IngestResult<UserRow> result;
  while (auto row = stream.next()) result.records.push_back(std::move(*row));
  result.tally = stream.tally();
  return result;
}

UserTable build_user_table(std::span<const UserRow> users, std::span<const RawPost> posts) {
  UserTable table;
  // Rows without a snapshot time rank below timed ones; ties go to the later row.
  std::map<std::string, std::optional<Instant>> seen_at;
  for (const auto& row : users) {
    auto [it, inserted] = table.try_emplace(row.user_id);
    auto& rec = it->second;
    auto& when = seen_at[row.user_id];
    const bool newer = inserted || !when || (row.snapshot_at && *row.snapshot_at >= *when);
    if (!newer) continue;
    rec.user_id = row.user_id;
    rec.friends_count = row.friends_count;
    rec.followers_count = row.followers_count;
    if (row.created_at) rec.created_at = row.created_at;
    if (row.snapshot_at) when = row.snapshot_at;
  }
  for (const auto& post : posts) {
    auto& rec = table[post.author_id];
    rec.user_id = post.author_id;
    ++rec.post_count;
    if (!rec.first_post_at || post.timestamp < *rec.first_post_at) rec.first_post_at = post.timestamp;
    if (!rec.last_post_at || post.timestamp > *rec.last_post_at) rec.last_post_at = post.timestamp;
  }
  return table;
}

UserTable subsample_users(const UserTable& table, std::size_t count, std::uint64_t seed) {
  if (count >= table.size()) return table;
  std::vector<const UserRecord*> all;
  all.reserve(table.size());
  for (const auto& [id, rec] : table) all.push_back(&rec);
  Rng rng(seed);
  // Partial Fisher-Yates: the first `count` slots are the sample.
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(all[i], all[i + rng.below(all.size() - i)]);
  }
  UserTable out;
  for (std::size_t i = 0; i < count; ++i) out.emplace(all[i]->user_id, *all[i]);
  return out;
}

}  // namespace biasdetect
