#pragma once

// Aligned n-gram evaluation.
//
// Generated and reference timelines share a minute axis. Cell (i, j) of the
// score matrix holds the clipped n-gram overlap between the generated update
// at slot i and the reference update at slot j, forced to 0 when the slots
// are more than one minute apart. The aligned count is the heaviest
// non-crossing one-to-one matching over that matrix, found by the usual
// sequence-alignment DP:
//
//   D[i][j] = max(D[i-1][j], D[i][j-1], D[i-1][j-1] + s[i-1][j-1])
//
// Precision and recall divide the aligned count by the total n-gram counts
// of the generated and reference timelines.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "livetl/core.hpp"

namespace livetl {

enum class TokenizerMode { Char, Whitespace };

struct TokenizerConfig {
  TokenizerMode mode = TokenizerMode::Char;
  int ngram_n = 1;
  bool lowercase = true;  // WHITESPACE mode only

  void validate() const;
};

using Tokens = std::vector<std::string>;

/// n-gram -> multiplicity. Keys are length-prefixed token concatenations so
/// that no two distinct n-grams collide.
using NgramCounts = std::unordered_map<std::string, std::int64_t>;

Tokens tokenize(std::string_view text, const TokenizerConfig& cfg);
NgramCounts ngram_multiset(const Tokens& tokens, int n);
std::int64_t ngram_total(const NgramCounts& counts);

/// Clipped intersection: sum over keys of min(count_a, count_b).
std::int64_t overlap(const NgramCounts& a, const NgramCounts& b);

class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), cells_(rows * cols, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::int64_t operator()(std::size_t i, std::size_t j) const { return cells_[i * cols_ + j]; }
  std::int64_t& operator()(std::size_t i, std::size_t j) { return cells_[i * cols_ + j]; }

  /// True when every cell is >= 0 and every cell with |i - j| > 1 is 0.
  bool is_banded() const;

  std::vector<Minute> gen_minutes;
  std::vector<Minute> ref_minutes;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::int64_t> cells_;
};

class SpanMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws SpanMismatch when the two timelines do not cover the same minutes.
ScoreMatrix build_score_matrix(const Timeline& gen, const Timeline& ref,
                               const TokenizerConfig& tok);

struct AlignmentResult {
  std::int64_t aligned = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::int64_t gen_total = 0;
  std::int64_t ref_total = 0;
};

/// Maximum-weight non-crossing one-to-one matching. Only positive-weight
/// cells are reported as pairs; backtracking prefers the diagonal, then
/// skipping a generated slot. gen_total/ref_total are left at 0.
AlignmentResult align(const ScoreMatrix& s);

/// Exhaustive enumeration of every non-crossing one-to-one matching.
/// Independent of align(); used as its test oracle. Throws
/// std::invalid_argument above 8x8.
std::int64_t brute_force_align(const ScoreMatrix& s);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

Prf prf(std::int64_t aligned, std::int64_t gen_total, std::int64_t ref_total);

/// Sum of n-gram counts over the present updates of a timeline.
std::int64_t timeline_ngram_total(const Timeline& tl, const TokenizerConfig& tok);

struct MatchEvaluation {
  std::string match_id;
  int n = 1;
  AlignmentResult result;
  Prf scores;
};

MatchEvaluation evaluate_match(const std::string& match_id, const Timeline& gen,
                               const Timeline& ref, const TokenizerConfig& tok);

struct CorpusEvaluation {
  int n = 1;
  std::int64_t gen_total = 0;
  std::int64_t ref_total = 0;
  std::int64_t aligned = 0;
  Prf scores;
  std::vector<MatchEvaluation> matches;
};

/// Micro-average: sums counts over matches, then recomputes the ratios.
CorpusEvaluation aggregate(std::vector<MatchEvaluation> matches, int n);

nlohmann::json to_json(const MatchEvaluation& e);
nlohmann::json to_json(const CorpusEvaluation& e);

/// Fixed-width table: reference / generated / aligned counts, P, R, F1.
std::string format_table(const CorpusEvaluation& e);

std::string to_string(TokenizerMode m);
std::optional<TokenizerMode> parse_tokenizer_mode(std::string_view s);

}  // namespace livetl
