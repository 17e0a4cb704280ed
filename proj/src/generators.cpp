#include "livetl/generators.hpp"

#include <stdexcept>

namespace livetl {

double match_fraction(const std::string& tweet_text, const std::string& reference_text,
                      const OracleConfig& cfg) {
  const auto tweet = ngram_multiset(tokenize(tweet_text, cfg.tokenizer), 1);
  const auto ref = ngram_multiset(tokenize(reference_text, cfg.tokenizer), 1);
  const auto shared = overlap(tweet, ref);
  std::int64_t denom = 0;
  switch (cfg.denominator) {
    case OracleDenominator::Reference:
      denom = ngram_total(ref);
      break;
    case OracleDenominator::Tweet:
      denom = ngram_total(tweet);
      break;
    case OracleDenominator::Union:
      denom = ngram_total(ref) + ngram_total(tweet) - shared;
      break;
  }
  return denom > 0 ? static_cast<double>(shared) / static_cast<double>(denom) : 0.0;
}

std::optional<std::string> oracle_extract(const GenerationRequest& req,
                                          const std::string& reference_text,
                                          const OracleConfig& cfg) {
  const Tweet* best = nullptr;
  double best_score = -1.0;
  for (const auto& t : req.tweets) {
    const double score = match_fraction(t.text, reference_text, cfg);
    if (best == nullptr || score > best_score ||
        (score == best_score && tweet_order(t, *best))) {
      best = &t;
      best_score = score;
    }
  }
  if (best == nullptr) return std::nullopt;
  return best->text;
}

std::optional<std::string> OracleGenerator::generate(const GenerationRequest& req) {
  if (!reference_.contains(req.minute)) return std::nullopt;
  const auto& ref = reference_.at(req.minute);
  if (!ref.present()) return std::nullopt;
  return oracle_extract(req, *ref.text, cfg_);
}

std::optional<std::string> EchoGenerator::generate(const GenerationRequest& req) {
  if (req.tweets.empty()) return std::nullopt;
  return req.tweets.front().text;
}

void BurstGateConfig::validate() const {
  if (trailing_minutes < 1) throw std::invalid_argument("trailing_minutes must be >= 1");
  if (!(ratio_threshold > 0.0)) throw std::invalid_argument("ratio_threshold must be > 0");
  if (min_count < 0) throw std::invalid_argument("min_count must be >= 0");
}

MinuteCounts count_by_minute(const std::vector<Tweet>& tweets) {
  MinuteCounts counts;
  for (const auto& t : tweets) ++counts[t.minute];
  return counts;
}

Decision burst_gate_decide(const MinuteCounts& counts, Minute minute, const BurstGateConfig& cfg) {
  auto count_at = [&](Minute m) -> std::int64_t {
    auto it = counts.find(m);
    return it == counts.end() ? 0 : it->second;
  };
  const std::int64_t current = count_at(minute);
  if (current < cfg.min_count) return Decision::No;

  std::int64_t trailing_sum = 0;
  for (Minute m = minute - cfg.trailing_minutes; m < minute; ++m) trailing_sum += count_at(m);
  // current >= ratio * sum / trailing, kept in multiplication form.
  const double lhs = static_cast<double>(current) * cfg.trailing_minutes;
  const double rhs = cfg.ratio_threshold * static_cast<double>(trailing_sum);
  return lhs >= rhs ? Decision::Yes : Decision::No;
}

BurstGate::BurstGate(MinuteCounts counts, BurstGateConfig cfg)
    : counts_(std::move(counts)), cfg_(cfg) {
  cfg_.validate();
}

Decision BurstGate::decide(const GenerationRequest& req) {
  return burst_gate_decide(counts_, req.minute, cfg_);
}

std::string to_string(OracleDenominator d) {
  switch (d) {
    case OracleDenominator::Reference: return "reference";
    case OracleDenominator::Tweet: return "tweet";
    case OracleDenominator::Union: return "union";
  }
  return "reference";
}

std::optional<OracleDenominator> parse_oracle_denominator(std::string_view s) {
  if (s == "reference") return OracleDenominator::Reference;
  if (s == "tweet") return OracleDenominator::Tweet;
  if (s == "union") return OracleDenominator::Union;
  return std::nullopt;
}

}  // namespace livetl
