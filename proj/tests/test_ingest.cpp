#include <doctest.h>

#include <random>
#include <sstream>

#include "livetl/ingest.hpp"
#include "livetl/text.hpp"
#include "support.hpp"

using namespace livetl;
using testsupport::timeline;

namespace {

std::string reference_jsonl(Minute first, Minute last) {
  std::string out;
  for (Minute m = first; m <= last; ++m) out += fmt::format("{{\"minute\":{},\"text\":\"u{}\"}}\n", m, m);
  return out;
}

std::string tweets_jsonl(const std::vector<std::pair<std::string, Minute>>& rows) {
  std::string out;
  for (const auto& [id, m] : rows) out += fmt::format("{{\"id\":\"{}\",\"t\":{},\"text\":\"hello {}\"}}\n", id, m, id);
  return out;
}

MatchDataset load(const std::string& tweets, const std::string& ref, const IngestConfig& cfg) {
  std::istringstream t(tweets), r(ref);
  return load_match(t, r, cfg, {"m", 0, {}});
}

IngestConfig small(std::int64_t min_tweets = 0) {
  IngestConfig cfg;
  cfg.min_tweets = min_tweets;
  return cfg;
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("preprocess strips hashtags and URLs") {
  CHECK(preprocess_text("Goal!! #fmarinos https://t.co/abc") == "Goal!!");
  CHECK(preprocess_text("＃grampus win ＃grampus") == "win");
  CHECK(preprocess_text("HTTPS://x.y/z   a \t b ") == "a b");
  CHECK(preprocess_text("a # b") == "a # b");
  CHECK(preprocess_text("#tag。next") == "。next");
  CHECK(preprocess_text("#名古屋々 勝った") == "勝った");
  CHECK(preprocess_text("score#3 now") == "score now");
  CHECK(preprocess_text("keep #x", true, false) == "keep #x");
  CHECK(preprocess_text("http://a b", false, true) == "http://a b");
}

TEST_CASE("preprocess is idempotent") {
  const std::vector<std::string> parts{"#",  "＃",   "http://", "https://", "HTTP://", " ", "  ", "\t",
                                       "a",  "ゴール", "。",      "!",        "_",       "x", "々", "/",
                                       "#a", ":",    "\xe3\x80\x80"};
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, parts.size() - 1), len(0, 12);
  for (int k = 0; k < 10000; ++k) {
    std::string s;
    for (std::size_t n = len(rng); n > 0; --n) s += parts[pick(rng)];
    const auto once = preprocess_text(s);
    REQUIRE_MESSAGE(preprocess_text(once) == once, "input: " << s);
  }
}

TEST_CASE("volume threshold is strict") {
  std::vector<std::pair<std::string, Minute>> rows;
  for (int k = 0; k < 3200; ++k) rows.emplace_back(fmt::format("{:05}", k), k % 10);
  const auto ref = reference_jsonl(0, 9);
  IngestConfig cfg;  // default 3200
  try {
    load(tweets_jsonl(rows), ref, cfg);
    FAIL("3200 tweets must be rejected");
  } catch (const IngestError& e) {
    CHECK(e.kind() == IngestError::Kind::Volume);
    CHECK(e.surviving() == 3200);
  }
  rows.emplace_back("extra", 5);
  CHECK(load(tweets_jsonl(rows), ref, cfg).tweets.size() == 3201);
}

TEST_CASE("window filter keeps [-before, end + after]") {
  IngestConfig cfg = small();
  cfg.window_before_minutes = 60;
  cfg.window_after_minutes = 60;
  const auto d = load(tweets_jsonl({{"a", -61}, {"b", -60}, {"c", 70}, {"d", 71}, {"e", 0}}),
                      reference_jsonl(0, 10), cfg);
  std::vector<std::string> ids;
  for (const auto& t : d.tweets) ids.push_back(t.id);
  CHECK(ids == std::vector<std::string>{"b", "e", "c"});
  CHECK(validate_dataset(d).empty());
}

TEST_CASE("malformed records carry their line") {
  const auto ref = reference_jsonl(0, 3);
  auto line_of = [&](const std::string& tweets) -> std::size_t {
    try {
      load(tweets, ref, small());
    } catch (const IngestError& e) {
      CHECK(e.kind() == IngestError::Kind::MalformedRecord);
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("{\"id\":\"a\",\"t\":0,\"text\":\"x\"}\n{not json\n") == 2);
  CHECK(line_of("{\"id\":\"a\",\"t\":0,\"text\":\"x\"}\n{\"id\":\"a\",\"t\":1,\"text\":\"y\"}\n") == 2);
  CHECK(line_of("{\"id\":\"a\",\"t\":0}\n") == 1);
  CHECK(line_of("{\"id\":\"a\",\"text\":\"x\"}\n") == 1);
}

TEST_CASE("reference archive errors") {
  auto kind_of = [](const std::string& ref) {
    std::istringstream r(ref);
    try {
      load_reference(r, {});
    } catch (const IngestError& e) {
      return e.kind();
    }
    return IngestError::Kind::Volume;  // sentinel: no error
  };
  CHECK(kind_of("") == IngestError::Kind::MalformedRecord);
  CHECK(kind_of("{\"minute\":1,\"text\":\"a\"}\n{\"minute\":1,\"text\":\"b\"}\n") ==
        IngestError::Kind::MalformedRecord);
  CHECK(kind_of("{\"minute\":1,\"text\":\"a\"}\n") == IngestError::Kind::Volume);
}

TEST_CASE("exclusion patterns blank matching updates") {
  std::istringstream r(
      "{\"minute\":0,\"text\":\"通算100試合出場\"}\n"
      "{\"minute\":1,\"text\":\"ゴール！\"}\n"
      "{\"minute\":2,\"text\":\"best of last week\"}\n");
  IngestConfig cfg;
  cfg.exclusion_patterns = {"通算", "last week"};
  const auto tl = load_reference(r, cfg);
  CHECK(tl == timeline(0, {std::nullopt, "ゴール！", std::nullopt}));
}

TEST_CASE("gaps and NaN read as ABSENT") {
  std::istringstream r("{\"minute\":3,\"text\":\"a\"}\n{\"minute\":5,\"text\":\"NaN\"}\n{\"minute\":6,\"text\":null}\n{\"minute\":7,\"text\":\"b\"}\n");
  CHECK(read_timeline(r) ==
        timeline(3, {"a", std::nullopt, std::nullopt, std::nullopt, "b"}));
}

TEST_CASE("timeline round trip") {
  const auto tl = timeline(-2, {"x", std::nullopt, "語\"q\"", std::nullopt, "z"});
  std::stringstream s;
  write_timeline(s, tl);
  CHECK(read_timeline(s) == tl);
}

TEST_CASE("bucket_by_minute partitions the input") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<Minute> minute(-60, 150);
  std::vector<Tweet> tweets;
  for (int k = 0; k < 10000; ++k) tweets.push_back(testsupport::tweet(fmt::format("{:05}", k), minute(rng), "t"));
  std::sort(tweets.begin(), tweets.end(), tweet_order);
  const auto buckets = bucket_by_minute(tweets);
  std::vector<Tweet> flat;
  for (const auto& [m, bucket] : buckets) {
    CHECK_FALSE(bucket.empty());
    for (const auto& t : bucket) {
      REQUIRE(t.minute == m);
      flat.push_back(t);
    }
  }
  CHECK(flat == tweets);
}

TEST_CASE("RFC3339 timestamps") {
  CHECK(parse_rfc3339_ms("1970-01-01T00:00:00Z") == 0);
  // 2000-01-01 is 946684800 s; +31 +29 days to March 1st; minus one hour of offset.
  CHECK(parse_rfc3339_ms("2000-03-01T00:00:00+01:00") == (946684800LL + 60 * 86400 - 3600) * 1000);
  CHECK(parse_rfc3339_ms("2000-03-01T00:00:00.250Z") == (946684800LL + 60 * 86400) * 1000 + 250);
  CHECK_FALSE(parse_rfc3339_ms("2022-13-01T00:00:00Z"));
  CHECK_FALSE(parse_rfc3339_ms("2022-02-30T00:00:00Z"));
  CHECK_FALSE(parse_rfc3339_ms("yesterday"));
}

TEST_CASE("ts field is bucketed relative to kickoff") {
  const auto kickoff = *parse_rfc3339_ms("2022-04-02T14:00:00+09:00");
  std::istringstream t(
      "{\"id\":\"a\",\"ts\":\"2022-04-02T05:03:59.999Z\",\"text\":\"x\"}\n"
      "{\"id\":\"b\",\"ts\":\"2022-04-02T04:59:59Z\",\"text\":\"y\"}\n");
  std::istringstream r(reference_jsonl(0, 5));
  const auto d = load_match(t, r, small(), {"m", kickoff, {}});
  REQUIRE(d.tweets.size() == 2);
  CHECK(d.tweets[0].id == "b");
  CHECK(d.tweets[0].minute == -1);
  CHECK(d.tweets[1].minute == 3);
}

TEST_CASE("serialized tweets load back unchanged") {
  std::mt19937_64 rng(3);
  auto d = testsupport::random_dataset(rng, 30, 5);
  for (auto& tw : d.tweets) tw.raw_text = tw.text + " #tag https://t.co/" + tw.id;
  std::string archive;
  for (const auto& tw : d.tweets) archive += serialize_tweet(tw).dump() + "\n";
  std::stringstream ref;
  write_timeline(ref, d.reference);
  std::istringstream t(archive);
  const auto back = load_match(t, ref, small(), {"m", 0, {}});
  CHECK(back.tweets == d.tweets);
  CHECK(back.reference == d.reference);
}

TEST_CASE("normalize_tweet_record") {
  const auto j = nlohmann::json::parse(R"({"id":7,"ts":"1970-01-01T00:02:30Z","text":"x","lang":"ja"})");
  CHECK(normalize_tweet_record(j, 0) == nlohmann::json::parse(R"({"id":"7","t":2,"text":"x"})"));
}

}
