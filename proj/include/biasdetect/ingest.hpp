#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasdetect/csv.hpp"
#include "biasdetect/timeutil.hpp"

namespace biasdetect {

enum class SourceKind { json_lines, csv };

/// Maps canonical record fields onto the keys (JSON) or header columns (CSV)
/// of a concrete dataset. JSON keys may use dots to reach nested objects.
struct FieldMap {
  SourceKind source_kind = SourceKind::json_lines;

  // Post fields.
  std::string author_id;
  std::string text;
  std::string timestamp;

  // User fields. Empty string means "not mapped".
  std::string user_id;
  std::string friends_count;
  std::string followers_count;
  std::string created_at;
  /// Time at which a profile row was observed (tweet snapshots). Latest wins.
  std::string snapshot_at;
  /// Treat the friends field as a comma-separated id list and count it.
  bool friends_is_list = false;

  std::string timestamp_format = "%Y-%m-%d %H:%M:%S";
  /// Optional override for user timestamps (created_at, snapshot_at).
  std::string user_timestamp_format;

  /// Optional declared dataset period; posts outside it are skipped.
  std::optional<Instant> period_start;
  std::optional<Instant> period_end;

  const std::string& user_format() const {
    return user_timestamp_format.empty() ? timestamp_format : user_timestamp_format;
  }

  /// Throws Error when a required mapping is empty.
  void validate_for_posts() const;
  void validate_for_users() const;

  static FieldMap from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct RawPost {
  std::string author_id;
  std::string text;
  Instant timestamp;

  bool operator==(const RawPost&) const = default;
};

/// One profile row as read from disk. Duplicates are resolved later.
struct UserRow {
  std::string user_id;
  std::int64_t friends_count = 0;
  std::optional<std::int64_t> followers_count;
  std::optional<Instant> created_at;
  std::optional<Instant> snapshot_at;

  bool operator==(const UserRow&) const = default;
};

struct UserRecord {
  std::string user_id;
  std::int64_t friends_count = 0;
  std::optional<std::int64_t> followers_count;
  std::optional<Instant> created_at;
  std::optional<Instant> first_post_at;
  std::optional<Instant> last_post_at;
  std::int64_t post_count = 0;
  std::vector<double> sentiment_scores;

  bool operator==(const UserRecord&) const = default;
};

using UserTable = std::map<std::string, UserRecord>;

/// Per-file accounting of what was accepted and why rows were dropped.
struct IngestTally {
  std::size_t records = 0;
  std::size_t accepted = 0;
  std::size_t malformed = 0;
  std::size_t bad_timestamp = 0;
  std::size_t out_of_period = 0;

  std::size_t skipped() const { return malformed + bad_timestamp + out_of_period; }
};

namespace detail {

/// Yields raw records (one JSON object or one CSV row) from a file.
class RecordSource {
 public:
  RecordSource(const std::filesystem::path& path, SourceKind kind);

  struct Record {
    bool well_formed = true;
    std::optional<std::string> get(const std::string& key) const;

    nlohmann::json object;
    std::vector<std::string> cells;
    const std::map<std::string, std::size_t>* header = nullptr;
  };

  /// False at end of input.
  bool next(Record& out);

 private:
  SourceKind kind_;
  std::ifstream in_;
  std::unique_ptr<csv::Reader> csv_;
  std::map<std::string, std::size_t> header_;
};

}  // namespace detail

/// Single-pass stream of posts. The schema-mismatch check fires when the
/// stream is exhausted, since it needs the final tally.
class PostStream {
 public:
  PostStream(const std::filesystem::path& path, FieldMap map);

  std::optional<RawPost> next();
  const IngestTally& tally() const { return tally_; }

 private:
  detail::RecordSource source_;
  FieldMap map_;
  IngestTally tally_;
  std::string path_;
};

class UserStream {
 public:
  UserStream(const std::filesystem::path& path, FieldMap map);

  std::optional<UserRow> next();
  const IngestTally& tally() const { return tally_; }

 private:
  detail::RecordSource source_;
  FieldMap map_;
  IngestTally tally_;
  std::string path_;
};

template <typename T>
struct IngestResult {
  std::vector<T> records;
  IngestTally tally;
};

IngestResult<RawPost> read_posts(const std::filesystem::path& path, const FieldMap& map);
IngestResult<UserRow> read_users(const std::filesystem::path& path, const FieldMap& map);

/// Merges profile rows and posts into one record per distinct user id.
/// Profile-less authors get friends_count = 0 and no followers; users with
/// no posts are kept with post_count = 0. Sentiment scores stay empty.
UserTable build_user_table(std::span<const UserRow> users, std::span<const RawPost> posts);

/// Seeded uniform subsample of `count` users (all users when count >= size).
UserTable subsample_users(const UserTable& table, std::size_t count, std::uint64_t seed);

}  // namespace biasdetect
