#pragma once

// Built-in gates and generators that run in-process.

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "livetl/core.hpp"
#include "livetl/eval_align.hpp"
#include "livetl/pipeline.hpp"

namespace livetl {

/// Denominator of the oracle's matching-word fraction.
enum class OracleDenominator { Reference, Tweet, Union };

struct OracleConfig {
  TokenizerConfig tokenizer{TokenizerMode::Char, 1, true};
  OracleDenominator denominator = OracleDenominator::Reference;
};

/// Fraction of the reference's tokens matched by the tweet (clipped
/// unigram overlap over the configured denominator).
double match_fraction(const std::string& tweet_text, const std::string& reference_text,
                      const OracleConfig& cfg = {});

/// Text of the window tweet with the highest match fraction against the
/// reference text. Ties go to the earlier minute, then the smaller id.
/// ABSENT on an empty window.
std::optional<std::string> oracle_extract(const GenerationRequest& req,
                                          const std::string& reference_text,
                                          const OracleConfig& cfg = {});

/// Oracle extractive generator: answers only at reference-present minutes.
class OracleGenerator final : public Generator {
 public:
  explicit OracleGenerator(Timeline reference, OracleConfig cfg = {})
      : reference_(std::move(reference)), cfg_(cfg) {}

  std::optional<std::string> generate(const GenerationRequest& req) override;

 private:
  Timeline reference_;
  OracleConfig cfg_;
};

/// Returns the first window tweet's text, ABSENT on an empty window.
class EchoGenerator final : public Generator {
 public:
  std::optional<std::string> generate(const GenerationRequest& req) override;
};

struct BurstGateConfig {
  int trailing_minutes = 5;
  double ratio_threshold = 2.0;
  std::int64_t min_count = 5;

  void validate() const;
};

using MinuteCounts = std::map<Minute, std::int64_t>;

MinuteCounts count_by_minute(const std::vector<Tweet>& tweets);

/// YES iff count(t) >= min_count and count(t) >= ratio * mean of the
/// counts over [t - trailing, t - 1]; missing minutes count as zero.
Decision burst_gate_decide(const MinuteCounts& counts, Minute minute, const BurstGateConfig& cfg);

class BurstGate final : public Gate {
 public:
  BurstGate(MinuteCounts counts, BurstGateConfig cfg);
  Decision decide(const GenerationRequest& req) override;

 private:
  MinuteCounts counts_;
  BurstGateConfig cfg_;
};

std::string to_string(OracleDenominator d);
std::optional<OracleDenominator> parse_oracle_denominator(std::string_view s);

}  // namespace livetl
