#include <doctest.h>

#include <random>

#include "livetl/generators.hpp"
#include "support.hpp"

using namespace livetl;
using testsupport::tweet;

namespace {

OracleConfig ws_oracle() {
  OracleConfig cfg;
  cfg.tokenizer.mode = TokenizerMode::Whitespace;
  return cfg;
}

}  // namespace

TEST_SUITE("generators") {

TEST_CASE("oracle picks the highest match fraction") {
  GenerationRequest req;
  req.minute = 0;
  req.tweets = {tweet("2", 0, "a b"), tweet("1", 0, "a b c")};
  CHECK(match_fraction("a b c", "a b c d", ws_oracle()) == doctest::Approx(0.75));
  CHECK(match_fraction("a b", "a b c d", ws_oracle()) == doctest::Approx(0.5));
  CHECK(oracle_extract(req, "a b c d", ws_oracle()) == "a b c");
}

TEST_CASE("oracle self-match and empty window") {
  GenerationRequest req;
  req.tweets = {tweet("1", 0, "nothing"), tweet("2", 1, "GOAL! Fujita scores"), tweet("3", 2, "GOAL")};
  CHECK(oracle_extract(req, "GOAL! Fujita scores") == "GOAL! Fujita scores");
  CHECK_FALSE(oracle_extract(GenerationRequest{}, "anything"));
}

TEST_CASE("oracle ties go to the earlier minute, then the smaller id") {
  GenerationRequest req;
  req.tweets = {tweet("9", 3, "x y"), tweet("5", 4, "x z"), tweet("1", 4, "x w")};
  CHECK(oracle_extract(req, "x q", ws_oracle()) == "x y");
  req.tweets.erase(req.tweets.begin());
  CHECK(oracle_extract(req, "x q", ws_oracle()) == "x w");
}

TEST_CASE("oracle denominators") {
  OracleConfig cfg = ws_oracle();
  cfg.denominator = OracleDenominator::Tweet;
  CHECK(match_fraction("a b", "a b c d", cfg) == doctest::Approx(1.0));
  cfg.denominator = OracleDenominator::Union;
  CHECK(match_fraction("a b e", "a b c d", cfg) == doctest::Approx(2.0 / 5.0));
  CHECK(parse_oracle_denominator(to_string(OracleDenominator::Union)) == OracleDenominator::Union);
}

TEST_CASE("oracle generator answers only where the reference is present") {
  const auto ref = testsupport::timeline(0, {"a", std::nullopt});
  OracleGenerator gen(ref);
  GenerationRequest req;
  req.tweets = {tweet("1", 0, "a")};
  req.minute = 0;
  CHECK(gen.generate(req) == "a");
  req.minute = 1;
  CHECK_FALSE(gen.generate(req));
}

TEST_CASE("echo returns the first tweet") {
  EchoGenerator echo;
  GenerationRequest req;
  CHECK_FALSE(echo.generate(req));
  req.tweets = {tweet("1", 0, "first"), tweet("2", 0, "second")};
  CHECK(echo.generate(req) == "first");
}

TEST_CASE("burst gate examples") {
  BurstGateConfig cfg;  // trailing 5, ratio 2, min_count 5
  CHECK(burst_gate_decide({}, 10, cfg) == Decision::No);
  MinuteCounts counts{{5, 2}, {6, 2}, {7, 2}, {8, 2}, {9, 2}, {10, 10}};
  CHECK(burst_gate_decide(counts, 10, cfg) == Decision::Yes);
  CHECK(burst_gate_decide({{10, 4}}, 10, cfg) == Decision::No);
  CHECK(burst_gate_decide({{10, 5}}, 10, cfg) == Decision::Yes);
  // 9 < 2 * mean(5) fails the ratio clause.
  CHECK(burst_gate_decide({{5, 5}, {6, 5}, {7, 5}, {8, 5}, {9, 5}, {10, 9}}, 10, cfg) == Decision::No);
  CHECK(burst_gate_decide({{5, 5}, {6, 5}, {7, 5}, {8, 5}, {9, 5}, {10, 10}}, 10, cfg) == Decision::Yes);
}

TEST_CASE("burst gate is monotone in the current count") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::int64_t> c(0, 20);
  BurstGateConfig cfg;
  for (int k = 0; k < 2000; ++k) {
    MinuteCounts counts;
    for (Minute m = 0; m < 6; ++m) counts[m] = c(rng);
    const auto before = burst_gate_decide(counts, 5, cfg);
    counts[5] += 1 + c(rng);
    if (before == Decision::Yes) REQUIRE(burst_gate_decide(counts, 5, cfg) == Decision::Yes);
  }
}

TEST_CASE("burst gate config") {
  BurstGateConfig cfg;
  cfg.trailing_minutes = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  const auto counts = count_by_minute({tweet("a", 1, "x"), tweet("b", 1, "y"), tweet("c", 3, "z")});
  CHECK(counts == MinuteCounts{{1, 2}, {3, 1}});
}

}
