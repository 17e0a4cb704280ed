#include "livetl/eval_align.hpp"

#include <algorithm>
#include <functional>

#include <fmt/format.h>

#include "livetl/text.hpp"

namespace livetl {

using nlohmann::json;

void TokenizerConfig::validate() const {
  if (ngram_n < 1) throw std::invalid_argument("ngram_n must be >= 1");
}

Tokens tokenize(std::string_view s, const TokenizerConfig& cfg) {
  Tokens out;
  if (cfg.mode == TokenizerMode::Char) {
    for (std::size_t pos = 0; pos < s.size();) {
      const auto d = text::decode(s, pos);
      if (!text::is_space(d.cp)) {
        std::string tok;
        text::append_utf8(tok, d.cp);
        out.push_back(std::move(tok));
      }
      pos += d.len;
    }
    return out;
  }

  std::string current;
  for (std::size_t pos = 0; pos < s.size();) {
    const auto d = text::decode(s, pos);
    if (text::is_space(d.cp)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.append(s.substr(pos, d.len));
    }
    pos += d.len;
  }
  if (!current.empty()) out.push_back(std::move(current));
  if (cfg.lowercase) {
    for (auto& tok : out) tok = text::ascii_lower(tok);
  }
  return out;
}

NgramCounts ngram_multiset(const Tokens& tokens, int n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  NgramCounts counts;
  const auto len = static_cast<std::size_t>(n);
  if (tokens.size() < len) return counts;
  std::string key;
  for (std::size_t start = 0; start + len <= tokens.size(); ++start) {
    key.clear();
    for (std::size_t k = 0; k < len; ++k) {
      const auto& tok = tokens[start + k];
      key += std::to_string(tok.size());
      key += ':';
      key += tok;
    }
    ++counts[key];
  }
  return counts;
}

std::int64_t ngram_total(const NgramCounts& counts) {
  std::int64_t total = 0;
  for (const auto& [key, c] : counts) total += c;
  return total;
}

std::int64_t overlap(const NgramCounts& a, const NgramCounts& b) {
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  std::int64_t total = 0;
  for (const auto& [key, c] : small) {
    if (auto it = large.find(key); it != large.end()) total += std::min(c, it->second);
  }
  return total;
}

bool ScoreMatrix::is_banded() const {
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      const auto v = (*this)(i, j);
      if (v < 0) return false;
      const auto gap = i > j ? i - j : j - i;
      if (gap > 1 && v != 0) return false;
    }
  }
  return true;
}

namespace {

std::vector<NgramCounts> slot_counts(const Timeline& tl, const TokenizerConfig& tok) {
  std::vector<NgramCounts> out;
  out.reserve(tl.size());
  for (const auto& u : tl.entries) {
    out.push_back(u.present() ? ngram_multiset(tokenize(*u.text, tok), tok.ngram_n)
                              : NgramCounts{});
  }
  return out;
}

}  // namespace

ScoreMatrix build_score_matrix(const Timeline& gen, const Timeline& ref,
                               const TokenizerConfig& tok) {
  tok.validate();
  if (!gen.is_dense() || !ref.is_dense()) throw SpanMismatch("timelines must be dense");
  const bool same_span = gen.size() == ref.size() &&
                         (gen.empty() || gen.start_minute == ref.start_minute);
  if (!same_span) {
    auto span = [](const Timeline& tl) {
      return tl.empty() ? std::string("[]")
                        : fmt::format("[{}, {}]", tl.start_minute, tl.end_minute());
    };
    throw SpanMismatch("generated span " + span(gen) + " differs from reference span " +
                       span(ref));
  }

  const auto g = slot_counts(gen, tok);
  const auto r = slot_counts(ref, tok);
  ScoreMatrix s(g.size(), r.size());
  for (const auto& u : gen.entries) s.gen_minutes.push_back(u.minute);
  for (const auto& u : ref.entries) s.ref_minutes.push_back(u.minute);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = std::min(i + 1, r.size() - 1);
    for (std::size_t j = lo; j <= hi; ++j) s(i, j) = overlap(g[i], r[j]);
  }
  return s;
}

AlignmentResult align(const ScoreMatrix& s) {
  const std::size_t m = s.rows();
  const std::size_t n = s.cols();
  const std::size_t width = n + 1;
  std::vector<std::int64_t> dp((m + 1) * width, 0);
  auto D = [&](std::size_t i, std::size_t j) -> std::int64_t& { return dp[i * width + j]; };

  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      D(i, j) = std::max({D(i - 1, j), D(i, j - 1), D(i - 1, j - 1) + s(i - 1, j - 1)});
    }
  }

  AlignmentResult result;
  result.aligned = D(m, n);
  std::size_t i = m;
  std::size_t j = n;
  while (i > 0 && j > 0) {
    const auto w = s(i - 1, j - 1);
    if (w > 0 && D(i, j) == D(i - 1, j - 1) + w) {
      result.pairs.emplace_back(i - 1, j - 1);
      --i;
      --j;
    } else if (D(i, j) == D(i - 1, j)) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(result.pairs.begin(), result.pairs.end());
  return result;
}

std::int64_t brute_force_align(const ScoreMatrix& s) {
  constexpr std::size_t kMaxDim = 8;
  if (s.rows() > kMaxDim || s.cols() > kMaxDim) {
    throw std::invalid_argument("brute_force_align: matrix larger than 8x8");
  }
  // Each generated row either stays unmatched or takes a column to the right
  // of every column already taken; every leaf of this recursion is one
  // non-crossing one-to-one matching.
  std::function<std::int64_t(std::size_t, std::size_t, std::int64_t)> walk =
      [&](std::size_t row, std::size_t first_free_col, std::int64_t acc) -> std::int64_t {
    if (row == s.rows()) return acc;
    std::int64_t best = walk(row + 1, first_free_col, acc);
    for (std::size_t col = first_free_col; col < s.cols(); ++col) {
      best = std::max(best, walk(row + 1, col + 1, acc + s(row, col)));
    }
    return best;
  };
  return walk(0, 0, 0);
}

Prf prf(std::int64_t aligned, std::int64_t gen_total, std::int64_t ref_total) {
  Prf out;
  out.precision = gen_total > 0 ? static_cast<double>(aligned) / static_cast<double>(gen_total) : 0.0;
  out.recall = ref_total > 0 ? static_cast<double>(aligned) / static_cast<double>(ref_total) : 0.0;
  const double sum = out.precision + out.recall;
  out.f1 = sum > 0.0 ? 2.0 * out.precision * out.recall / sum : 0.0;
  return out;
}

std::int64_t timeline_ngram_total(const Timeline& tl, const TokenizerConfig& tok) {
  std::int64_t total = 0;
  for (const auto& u : tl.entries) {
    if (!u.present()) continue;
    const auto tokens = tokenize(*u.text, tok);
    const auto n = static_cast<std::size_t>(tok.ngram_n);
    if (tokens.size() >= n) total += static_cast<std::int64_t>(tokens.size() - n + 1);
  }
  return total;
}

MatchEvaluation evaluate_match(const std::string& match_id, const Timeline& gen,
                               const Timeline& ref, const TokenizerConfig& tok) {
  MatchEvaluation e;
  e.match_id = match_id;
  e.n = tok.ngram_n;
  e.result = align(build_score_matrix(gen, ref, tok));
  e.result.gen_total = timeline_ngram_total(gen, tok);
  e.result.ref_total = timeline_ngram_total(ref, tok);
  e.scores = prf(e.result.aligned, e.result.gen_total, e.result.ref_total);
  return e;
}

CorpusEvaluation aggregate(std::vector<MatchEvaluation> matches, int n) {
  CorpusEvaluation c;
  c.n = n;
  std::sort(matches.begin(), matches.end(),
            [](const MatchEvaluation& a, const MatchEvaluation& b) { return a.match_id < b.match_id; });
  for (const auto& m : matches) {
    c.gen_total += m.result.gen_total;
    c.ref_total += m.result.ref_total;
    c.aligned += m.result.aligned;
  }
  c.scores = prf(c.aligned, c.gen_total, c.ref_total);
  c.matches = std::move(matches);
  return c;
}

json to_json(const MatchEvaluation& e) {
  json pairs = json::array();
  for (const auto& [i, j] : e.result.pairs) pairs.push_back({i, j});
  return json{{"match_id", e.match_id},
              {"n", e.n},
              {"gen_total", e.result.gen_total},
              {"ref_total", e.result.ref_total},
              {"aligned", e.result.aligned},
              {"precision", e.scores.precision},
              {"recall", e.scores.recall},
              {"f1", e.scores.f1},
              {"pairs", std::move(pairs)}};
}

json to_json(const CorpusEvaluation& e) {
  json matches = json::array();
  for (const auto& m : e.matches) matches.push_back(to_json(m));
  return json{{"n", e.n},
              {"gen_total", e.gen_total},
              {"ref_total", e.ref_total},
              {"aligned", e.aligned},
              {"precision", e.scores.precision},
              {"recall", e.scores.recall},
              {"f1", e.scores.f1},
              {"matches", std::move(matches)}};
}

std::string format_table(const CorpusEvaluation& e) {
  std::string out;
  out += fmt::format("{:<24} {:>12} {:>12} {:>12} {:>9} {:>9} {:>9}\n", "match",
                     fmt::format("# ref {}g", e.n), fmt::format("# gen {}g", e.n),
                     fmt::format("# aligned"), "P", "R", "F1");
  auto row = [&](const std::string& name, std::int64_t ref, std::int64_t gen, std::int64_t al,
                 const Prf& p) {
    out += fmt::format("{:<24} {:>12} {:>12} {:>12} {:>9.3f} {:>9.3f} {:>9.3f}\n", name, ref, gen,
                       al, p.precision, p.recall, p.f1);
  };
  for (const auto& m : e.matches) {
    row(m.match_id, m.result.ref_total, m.result.gen_total, m.result.aligned, m.scores);
  }
  row("TOTAL (micro)", e.ref_total, e.gen_total, e.aligned, e.scores);
  return out;
}

std::string to_string(TokenizerMode m) { return m == TokenizerMode::Char ? "char" : "ws"; }

std::optional<TokenizerMode> parse_tokenizer_mode(std::string_view s) {
  if (s == "char") return TokenizerMode::Char;
  if (s == "ws" || s == "whitespace") return TokenizerMode::Whitespace;
  return std::nullopt;
}

}  // namespace livetl
