#include <doctest.h>

#include <random>

#include "livetl/eval_align.hpp"
#include "support.hpp"

using namespace livetl;
using testsupport::timeline;

namespace {

ScoreMatrix matrix(const std::vector<std::vector<std::int64_t>>& rows) {
  ScoreMatrix s(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) s(i, j) = rows[i][j];
  return s;
}

ScoreMatrix random_banded(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<std::int64_t> v(0, 9);
  ScoreMatrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if ((i > j ? i - j : j - i) <= 1) s(i, j) = v(rng);
  return s;
}

TokenizerConfig ws(int n = 1) {
  return {TokenizerMode::Whitespace, n, true};
}

}  // namespace

TEST_SUITE("eval_align") {

TEST_CASE("tokenize") {
  CHECK(tokenize("", {}).empty());
  CHECK(tokenize("ab c", {}) == Tokens{"a", "b", "c"});
  CHECK(tokenize("ゴール！ 1", {}) == Tokens{"ゴ", "ー", "ル", "！", "1"});
  CHECK(tokenize("Goal Goal!", ws()) == Tokens{"goal", "goal!"});
  CHECK(tokenize("  a\tB  ", ws()) == Tokens{"a", "b"});
}

TEST_CASE("ngram multisets and overlap") {
  const auto bi = ngram_multiset({"a", "b", "c"}, 2);
  CHECK(bi.size() == 2);
  CHECK(ngram_total(bi) == 2);
  CHECK(ngram_multiset({"a", "a", "a"}, 1) == NgramCounts{{ngram_multiset({"a"}, 1).begin()->first, 3}});
  CHECK(ngram_multiset({"a", "b"}, 3).empty());
  // {a:2,b:1} vs {a:1,c:4}
  CHECK(overlap(ngram_multiset({"a", "a", "b"}, 1), ngram_multiset({"a", "c", "c", "c", "c"}, 1)) == 1);
  CHECK(overlap(ngram_multiset({"x", "y"}, 1), ngram_multiset({"z"}, 1)) == 0);
  // token boundaries matter: ("ab","c") is not ("a","bc")
  CHECK(overlap(ngram_multiset({"ab", "c"}, 2), ngram_multiset({"a", "bc"}, 2)) == 0);
}

TEST_CASE("score matrix") {
  const auto ref = timeline(0, {"ab", std::nullopt, "cd", "ef"});
  SUBCASE("all ABSENT") {
    const auto s = build_score_matrix(Timeline::empty_span(0, 3), ref, {});
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(s(i, j) == 0);
  }
  SUBCASE("identity") {
    const auto s = build_score_matrix(ref, ref, {});
    CHECK(s(0, 0) == 2);
    CHECK(s(2, 2) == 2);
    CHECK(s.is_banded());
  }
  SUBCASE("one minute off stays in band; two minutes off does not") {
    const auto gen = timeline(0, {std::nullopt, "cd", std::nullopt, std::nullopt});
    CHECK(build_score_matrix(gen, ref, {})(1, 2) == 2);
    const auto far = timeline(0, {"ef", std::nullopt, std::nullopt, std::nullopt});
    CHECK(build_score_matrix(far, ref, {})(0, 3) == 0);
  }
  CHECK_THROWS_AS(build_score_matrix(timeline(1, {"a", "b", "c", "d"}), ref, {}), SpanMismatch);
  CHECK_THROWS_AS(build_score_matrix(timeline(0, {"a"}), ref, {}), SpanMismatch);
}

TEST_CASE("align examples") {
  auto r = align(matrix({{5}}));
  CHECK(r.aligned == 5);
  CHECK(r.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}});

  r = align(matrix({{0, 4}, {4, 0}}));
  CHECK(r.aligned == 4);
  CHECK(r.pairs.size() == 1);
  CHECK(brute_force_align(matrix({{0, 4}, {4, 0}})) == 4);

  CHECK(align(matrix({{0, 0}, {0, 0}})).pairs.empty());
  CHECK(brute_force_align(matrix({{3, 0, 0}, {0, 4, 0}, {0, 0, 5}})) == 12);
  CHECK_THROWS_AS(brute_force_align(ScoreMatrix(9, 9)), std::invalid_argument);
}

TEST_CASE("align matches brute force") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  for (int k = 0; k < 3000; ++k) {
    const auto s = random_banded(rng, dim(rng));
    const auto r = align(s);
    REQUIRE(r.aligned == brute_force_align(s));
    // the reported pairs are a valid matching that achieves the total
    std::int64_t sum = 0;
    for (std::size_t p = 0; p < r.pairs.size(); ++p) {
      sum += s(r.pairs[p].first, r.pairs[p].second);
      CHECK(s(r.pairs[p].first, r.pairs[p].second) > 0);
      if (p > 0) {
        CHECK(r.pairs[p - 1].first < r.pairs[p].first);
        CHECK(r.pairs[p - 1].second < r.pairs[p].second);
      }
    }
    REQUIRE(sum == r.aligned);
  }
}

TEST_CASE("prf") {
  auto p = prf(19585, 49088, 164245);
  CHECK(p.precision == doctest::Approx(0.3990).epsilon(0.0005));
  CHECK(p.recall == doctest::Approx(0.1192).epsilon(0.0005));
  CHECK(p.f1 == doctest::Approx(0.1836).epsilon(0.0005));
  p = prf(0, 0, 100);
  CHECK(p.precision == 0.0);
  CHECK(p.recall == 0.0);
  CHECK(p.f1 == 0.0);
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<std::int64_t> v(0, 1000);
  for (int k = 0; k < 1000; ++k) {
    const auto g = v(rng), r = v(rng);
    const auto a = std::min({g, r, v(rng)});
    const auto s = prf(a, g, r);
    REQUIRE(s.precision >= 0.0);
    REQUIRE(s.precision <= 1.0);
    REQUIRE(s.recall <= 1.0);
    REQUIRE(s.f1 <= std::max(s.precision, s.recall) + 1e-12);
    REQUIRE(s.f1 >= std::min(s.precision, s.recall) - 1e-12);
  }
}

TEST_CASE("evaluate_match: identity, empty and monotonicity") {
  const auto ref = timeline(0, {"goal by A", std::nullopt, "card for B", "sub C for D"});
  auto e = evaluate_match("m", ref, ref, ws());
  CHECK(e.scores.precision == 1.0);
  CHECK(e.scores.recall == 1.0);
  CHECK(e.scores.f1 == 1.0);
  e = evaluate_match("m", Timeline::empty_span(0, 3), ref, ws());
  CHECK(e.result.aligned == 0);
  CHECK(e.scores.f1 == 0.0);
  CHECK(e.result.ref_total == 10);

  // adding a present update never lowers aligned
  const auto partial = timeline(0, {"goal by A", std::nullopt, std::nullopt, std::nullopt});
  const auto more = timeline(0, {"goal by A", "card", std::nullopt, std::nullopt});
  CHECK(evaluate_match("m", more, ref, ws()).result.aligned >=
        evaluate_match("m", partial, ref, ws()).result.aligned);
}

TEST_CASE("bigram totals") {
  const auto ref = timeline(0, {"a b c", "d"});
  CHECK(timeline_ngram_total(ref, ws(2)) == 2);
  CHECK(timeline_ngram_total(ref, ws(1)) == 4);
}

TEST_CASE("aggregate micro-averages") {
  const auto ref = timeline(0, {"a b", "c d"});
  const auto gen = timeline(0, {"a x", std::nullopt});
  auto c = aggregate({evaluate_match("z", gen, ref, ws()), evaluate_match("a", ref, ref, ws())}, 1);
  CHECK(c.matches[0].match_id == "a");
  CHECK(c.aligned == 5);
  CHECK(c.gen_total == 6);
  CHECK(c.ref_total == 8);
  CHECK(c.scores.precision == doctest::Approx(5.0 / 6.0));
  const auto j = to_json(c);
  CHECK(j["aligned"] == 5);
  CHECK(j["matches"].size() == 2);
  CHECK(format_table(c).find("TOTAL") != std::string::npos);
  CHECK(to_json(aggregate({}, 1))["f1"] == 0.0);
}

}
