#pragma once

// Per-minute generation loop. For each minute t of the reference span the
// driver gathers tweets from [t, t + lookahead], optionally the present
// updates from [t - lookback, t - 1], asks the gate (gated variants only),
// and records the generator's answer.
//
//   BASE     tweets            -> generator -> update | ABSENT
//   CLF      tweets -> gate    -> YES: generator -> update ; NO: ABSENT
//   CXT      tweets + context  -> generator -> update | ABSENT
//   CLF_CXT  tweets + context  -> gate -> YES: generator ; NO: ABSENT

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "livetl/core.hpp"

namespace livetl {

struct ContextEntry {
  Minute minute = 0;
  std::string text;

  friend bool operator==(const ContextEntry&, const ContextEntry&) = default;
};

struct GenerationRequest {
  Minute minute = 0;
  std::vector<Tweet> tweets;
  std::vector<ContextEntry> context;
};

enum class Decision { No, Yes };

class Gate {
 public:
  virtual ~Gate() = default;
  virtual Decision decide(const GenerationRequest& req) = 0;
};

class Generator {
 public:
  virtual ~Generator() = default;
  /// Update text, or nullopt for ABSENT.
  virtual std::optional<std::string> generate(const GenerationRequest& req) = 0;
};

/// Raised by run_match for any generator or gate failure, and for a gated
/// generator that answers ABSENT. No partial timeline accompanies it.
class GeneratorFailure : public std::runtime_error {
 public:
  GeneratorFailure(Minute minute, const std::string& cause)
      : std::runtime_error("generator failure at minute " + std::to_string(minute) + ": " + cause),
        minute_(minute),
        cause_(cause) {}

  Minute minute() const { return minute_; }
  const std::string& cause() const { return cause_; }

 private:
  Minute minute_;
  std::string cause_;
};

using MinuteBuckets = std::map<Minute, std::vector<Tweet>>;

GenerationRequest build_request(const MinuteBuckets& buckets, const Timeline& reference,
                                Minute minute, const PipelineConfig& cfg,
                                const Timeline& emitted);

/// Convenience overload; buckets the dataset's tweets on every call.
GenerationRequest build_request(const MatchDataset& d, Minute minute, const PipelineConfig& cfg,
                                const Timeline& emitted);

/// `gate` must be non-null exactly for the CLF and CLF_CXT variants
/// (std::invalid_argument otherwise).
Timeline run_match(const MatchDataset& d, const PipelineConfig& cfg, Generator& gen,
                   Gate* gate = nullptr);

/// YES exactly at minutes where the reference timeline has a present update.
std::unique_ptr<Gate> reference_presence_gate(const MatchDataset& d);

}  // namespace livetl
