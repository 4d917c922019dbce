#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "biasdetect/error.hpp"
#include "biasdetect/ingest.hpp"
#include "biasdetect/rng.hpp"
#include "support.hpp"

using namespace biasdetect;

namespace {

Instant at(const char* text) { return *parse_instant(text, "%Y-%m-%d %H:%M:%S"); }

FieldMap post_map(const char* author, const char* text, const char* ts) {
  FieldMap m;
  m.author_id = author;
  m.text = text;
  m.timestamp = ts;
  return m;
}

FieldMap user_map() {
  FieldMap m;
  m.user_id = "id";
  m.friends_count = "friends";
  m.followers_count = "followers";
  m.created_at = "since";
  m.snapshot_at = "seen";
  return m;
}

}  // namespace

TEST_CASE("read_posts maps a three-line JSON-lines file in order") {
  testing::TempDir dir;
  const auto path = dir.write("posts.jsonl",
                              "{\"uid\":\"a\",\"body\":\"Good food.\",\"ts\":\"2015-01-02 10:00:00\"}\n"
                              "{\"uid\":\"b\",\"body\":\"bad\",\"ts\":\"2015-01-03 11:30:00\"}\n"
                              "{\"uid\":\"a\",\"body\":\"\",\"ts\":\"2015-01-04 00:00:01\"}\n");
  const auto result = read_posts(path, post_map("uid", "body", "ts"));
  const std::vector<RawPost> expected{{"a", "Good food.", at("2015-01-02 10:00:00")},
                                      {"b", "bad", at("2015-01-03 11:30:00")},
                                      {"a", "", at("2015-01-04 00:00:01")}};
  CHECK(result.records == expected);
  CHECK(result.tally.records == 3);
  CHECK(result.tally.accepted == 3);
  CHECK(result.tally.skipped() == 0);
}

TEST_CASE("read_posts on an empty file yields nothing and skips nothing") {
  testing::TempDir dir;
  const auto path = dir.write("empty.jsonl", "");
  const auto result = read_posts(path, post_map("uid", "body", "ts"));
  CHECK(result.records.empty());
  CHECK(result.tally.skipped() == 0);
}

TEST_CASE("one bad timestamp among four rows is skipped and tallied") {
  testing::TempDir dir;
  const auto path = dir.write("posts.csv",
                              "uid,body,ts\n"
                              "a,one,2015-01-01 00:00:00\n"
                              "b,two,yesterday\n"
                              "c,\"three, with comma\",2015-01-03 00:00:00\n"
                              "d,four,2015-01-04 00:00:00\n");
  auto map = post_map("uid", "body", "ts");
  map.source_kind = SourceKind::csv;
  const auto result = read_posts(path, map);
  REQUIRE(result.records.size() == 3);
  CHECK(result.tally.skipped() == 1);
  CHECK(result.tally.bad_timestamp == 1);
  CHECK(result.records[1].text == "three, with comma");
  CHECK(result.records[2].author_id == "d");
}

TEST_CASE("CSV fields may span lines inside quotes") {
  testing::TempDir dir;
  const auto path = dir.write("posts.csv", "uid,body,ts\r\na,\"line one\nline \"\"two\"\"\",2015-01-01 00:00:00\r\n");
  auto map = post_map("uid", "body", "ts");
  map.source_kind = SourceKind::csv;
  const auto result = read_posts(path, map);
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].text == "line one\nline \"two\"");
}

TEST_CASE("more than half malformed records is a schema mismatch") {
  testing::TempDir dir;
  const auto path = dir.write("posts.jsonl",
                              "{\"user\":\"a\",\"text\":\"x\",\"date\":\"2015-01-01 00:00:00\"}\n"
                              "{\"user\":\"b\",\"text\":\"y\",\"date\":\"2015-01-01 00:00:00\"}\n"
                              "{\"uid\":\"c\",\"body\":\"z\",\"ts\":\"2015-01-01 00:00:00\"}\n");
  CHECK_THROWS_AS(read_posts(path, post_map("uid", "body", "ts")), SchemaMismatch);
}

TEST_CASE("exactly half malformed is tolerated") {
  testing::TempDir dir;
  const auto path = dir.write("posts.jsonl",
                              "not json\n"
                              "{\"uid\":\"c\",\"body\":\"z\",\"ts\":\"2015-01-01 00:00:00\"}\n");
  const auto result = read_posts(path, post_map("uid", "body", "ts"));
  CHECK(result.records.size() == 1);
  CHECK(result.tally.malformed == 1);
}

TEST_CASE("unreadable file is fatal") {
  CHECK_THROWS_AS(read_posts("/nonexistent/posts.jsonl", post_map("uid", "body", "ts")), Error);
}

TEST_CASE("dotted keys reach nested JSON objects") {
  testing::TempDir dir;
  const auto path =
      dir.write("tweets.jsonl", "{\"user\":{\"id\":7},\"full_text\":\"hi\",\"created\":\"2020-03-01 12:00:00\"}\n");
  const auto result = read_posts(path, post_map("user.id", "full_text", "created"));
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].author_id == "7");
}

TEST_CASE("posts outside the configured period are skipped") {
  testing::TempDir dir;
  const auto path = dir.write("posts.jsonl",
                              "{\"uid\":\"a\",\"body\":\"x\",\"ts\":\"2014-12-31 23:59:59\"}\n"
                              "{\"uid\":\"a\",\"body\":\"x\",\"ts\":\"2015-01-01 00:00:00\"}\n"
                              "{\"uid\":\"a\",\"body\":\"x\",\"ts\":\"2016-01-01 00:00:01\"}\n");
  auto map = post_map("uid", "body", "ts");
  map.period_start = at("2015-01-01 00:00:00");
  map.period_end = at("2016-01-01 00:00:00");
  const auto result = read_posts(path, map);
  CHECK(result.records.size() == 1);
  CHECK(result.tally.out_of_period == 2);
}

TEST_CASE("timezone offsets are honored") {
  testing::TempDir dir;
  const auto path = dir.write("posts.jsonl", "{\"uid\":\"a\",\"body\":\"x\",\"ts\":\"2020-03-01T12:00:00+0200\"}\n");
  auto map = post_map("uid", "body", "ts");
  map.timestamp_format = "%Y-%m-%dT%H:%M:%S%z";
  const auto result = read_posts(path, map);
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].timestamp == at("2020-03-01 10:00:00"));
}

TEST_CASE("read_users parses string counts") {
  testing::TempDir dir;
  const auto path = dir.write("users.jsonl",
                              "{\"id\":\"a\",\"friends\":\"3\",\"followers\":5,\"since\":\"2015-01-01 00:00:00\"}\n"
                              "{\"id\":\"b\",\"friends\":\"3\"}\n");
  const auto result = read_users(path, user_map());
  REQUIRE(result.records.size() == 2);
  CHECK(result.records[0].friends_count == 3);
  CHECK(result.records[1].friends_count == 3);
  CHECK(result.records[0].followers_count == 5);
  CHECK(result.records[0].created_at == at("2015-01-01 00:00:00"));
  CHECK_FALSE(result.records[1].followers_count.has_value());
}

TEST_CASE("unmapped followers stay absent without error") {
  testing::TempDir dir;
  const auto path = dir.write("users.jsonl", "{\"id\":\"a\",\"friends\":2,\"followers\":9}\n");
  auto map = user_map();
  map.followers_count.clear();
  const auto result = read_users(path, map);
  REQUIRE(result.records.size() == 1);
  CHECK_FALSE(result.records[0].followers_count.has_value());
  CHECK(result.tally.skipped() == 0);
}

TEST_CASE("duplicate user rows are all yielded") {
  testing::TempDir dir;
  const auto path = dir.write("users.jsonl", "{\"id\":\"a\",\"friends\":1}\n{\"id\":\"a\",\"friends\":2}\n");
  const auto result = read_users(path, user_map());
  CHECK(result.records.size() == 2);
}

TEST_CASE("friends given as a comma list are counted") {
  testing::TempDir dir;
  const auto path = dir.write("users.jsonl",
                              "{\"id\":\"a\",\"friends\":\"x1, x2, x3\"}\n{\"id\":\"b\",\"friends\":\"None\"}\n");
  auto map = user_map();
  map.friends_is_list = true;
  const auto result = read_users(path, map);
  REQUIRE(result.records.size() == 2);
  CHECK(result.records[0].friends_count == 3);
  CHECK(result.records[1].friends_count == 0);
}

TEST_CASE("negative counts are malformed") {
  testing::TempDir dir;
  const auto path = dir.write("users.jsonl", "{\"id\":\"a\",\"friends\":-1}\n{\"id\":\"b\",\"friends\":1}\n");
  const auto result = read_users(path, user_map());
  CHECK(result.records.size() == 1);
  CHECK(result.tally.malformed == 1);
}

TEST_CASE("field map validation names the missing mapping") {
  FieldMap m;
  m.author_id = "a";
  m.text = "t";
  CHECK_THROWS_WITH_AS(m.validate_for_posts(), doctest::Contains("timestamp"), Error);
  CHECK_THROWS_AS(FieldMap{}.validate_for_users(), Error);
}

TEST_CASE("field map round-trips through JSON") {
  auto m = user_map();
  m.author_id = "uid";
  m.text = "body";
  m.timestamp = "ts";
  m.source_kind = SourceKind::csv;
  m.friends_is_list = true;
  m.user_timestamp_format = "%Y-%m-%d";
  m.period_start = at("2015-01-01 00:00:00");
  const auto back = FieldMap::from_json(m.to_json());
  CHECK(back.to_json() == m.to_json());
  CHECK(back.period_start == m.period_start);
}

TEST_CASE("shipped field maps load") {
  for (const char* name : {"fieldmap_yelp.json", "fieldmap_tweets.json"}) {
    const auto m = FieldMap::from_json(nlohmann::json::parse(testing::slurp(testing::fixture(name))));
    CHECK_NOTHROW(m.validate_for_posts());
    CHECK_NOTHROW(m.validate_for_users());
  }
}

TEST_CASE("build_user_table counts posts per author") {
  const std::vector<UserRow> users{{"A", 4, std::nullopt, std::nullopt, std::nullopt},
                                   {"B", 1, 2, std::nullopt, std::nullopt}};
  const std::vector<RawPost> posts{{"A", "x", at("2015-01-02 00:00:00")},
                                   {"B", "y", at("2015-01-05 00:00:00")},
                                   {"A", "z", at("2015-01-01 00:00:00")}};
  const auto table = build_user_table(users, posts);
  REQUIRE(table.size() == 2);
  CHECK(table.at("A").post_count == 2);
  CHECK(table.at("B").post_count == 1);
  CHECK(table.at("A").first_post_at == at("2015-01-01 00:00:00"));
  CHECK(table.at("A").last_post_at == at("2015-01-02 00:00:00"));
  CHECK(table.at("A").friends_count == 4);
}

TEST_CASE("authors without a profile get zero friends and no followers") {
  const std::vector<RawPost> posts{{"C", "x", at("2015-01-02 00:00:00")}};
  const auto table = build_user_table({}, posts);
  REQUIRE(table.count("C") == 1);
  CHECK(table.at("C").friends_count == 0);
  CHECK_FALSE(table.at("C").followers_count.has_value());
}

TEST_CASE("profile-only users are kept with zero posts") {
  const std::vector<UserRow> users{{"Z", 3, std::nullopt, std::nullopt, std::nullopt}};
  const auto table = build_user_table(users, {});
  REQUIRE(table.count("Z") == 1);
  CHECK(table.at("Z").post_count == 0);
  CHECK_FALSE(table.at("Z").first_post_at.has_value());
}

TEST_CASE("latest snapshot wins for followers") {
  const std::vector<UserRow> users{{"A", 1, 12, std::nullopt, at("2020-03-02 00:00:00")},
                                   {"A", 1, 10, std::nullopt, at("2020-03-01 00:00:00")}};
  CHECK(build_user_table(users, {}).at("A").followers_count == 12);
  const std::vector<UserRow> in_order{{"A", 1, 10, std::nullopt, at("2020-03-01 00:00:00")},
                                      {"A", 1, 12, std::nullopt, at("2020-03-02 00:00:00")}};
  CHECK(build_user_table(in_order, {}).at("A").followers_count == 12);
}

TEST_CASE("post conservation and order insensitivity") {
  Rng rng(11);
  std::vector<RawPost> posts;
  for (int i = 0; i < 300; ++i) {
    posts.push_back({"u" + std::to_string(rng.below(40)), "t",
                     Instant{std::chrono::seconds{1400000000 + static_cast<long long>(rng.below(100000000))}}});
  }
  const auto table = build_user_table({}, posts);
  std::int64_t total = 0;
  for (const auto& [id, u] : table) {
    total += u.post_count;
    CHECK(*u.first_post_at <= *u.last_post_at);
  }
  CHECK(total == static_cast<std::int64_t>(posts.size()));
  for (int trial = 0; trial < 5; ++trial) {
    rng.shuffle(std::span<RawPost>(posts));
    CHECK(build_user_table({}, posts) == table);
  }
}

TEST_CASE("subsample is seeded and sized") {
  UserTable table;
  for (int i = 0; i < 50; ++i) table["u" + std::to_string(i)].user_id = "u" + std::to_string(i);
  const auto a = subsample_users(table, 10, 3);
  CHECK(a.size() == 10);
  CHECK(subsample_users(table, 10, 3) == a);
  CHECK(subsample_users(table, 80, 3).size() == 50);
}
