#include "livetl/pipeline.hpp"

#include <set>

#include "livetl/ingest.hpp"
#include "livetl/text.hpp"

namespace livetl {

namespace {

class ReferencePresenceGate final : public Gate {
 public:
  explicit ReferencePresenceGate(const Timeline& reference) {
    for (const auto& u : reference.entries) {
      if (u.present()) present_.insert(u.minute);
    }
  }

  Decision decide(const GenerationRequest& req) override {
    return present_.count(req.minute) != 0 ? Decision::Yes : Decision::No;
  }

 private:
  std::set<Minute> present_;
};

void append_context(const Timeline& source, Minute from, Minute to,
                    std::vector<ContextEntry>& out) {
  for (Minute m = from; m <= to; ++m) {
    if (!source.contains(m)) continue;
    const auto& u = source.at(m);
    if (u.present()) out.push_back({m, *u.text});
  }
}

}  // namespace

GenerationRequest build_request(const MinuteBuckets& buckets, const Timeline& reference,
                                Minute minute, const PipelineConfig& cfg,
                                const Timeline& emitted) {
  GenerationRequest req;
  req.minute = minute;
  const Minute last = minute + cfg.tweet_lookahead_minutes;
  for (auto it = buckets.lower_bound(minute); it != buckets.end() && it->first <= last; ++it) {
    req.tweets.insert(req.tweets.end(), it->second.begin(), it->second.end());
  }
  if (uses_context(cfg.variant)) {
    const Timeline& source =
        cfg.context_source == ContextSource::Reference ? reference : emitted;
    append_context(source, minute - cfg.context_lookback_minutes, minute - 1, req.context);
  }
  return req;
}

GenerationRequest build_request(const MatchDataset& d, Minute minute, const PipelineConfig& cfg,
                                const Timeline& emitted) {
  return build_request(bucket_by_minute(d.tweets), d.reference, minute, cfg, emitted);
}

Timeline run_match(const MatchDataset& d, const PipelineConfig& cfg, Generator& gen,
                   Gate* gate) {
  cfg.validate();
  if (uses_gate(cfg.variant) != (gate != nullptr)) {
    throw std::invalid_argument("variant " + to_string(cfg.variant) +
                                (gate ? " takes no gate" : " requires a gate"));
  }

  Timeline out;
  if (d.reference.empty()) return out;
  out.start_minute = d.reference.start_minute;
  out.entries.reserve(d.reference.size());

  const auto buckets = bucket_by_minute(d.tweets);
  for (const auto& ref_slot : d.reference.entries) {
    const Minute t = ref_slot.minute;
    const auto req = build_request(buckets, d.reference, t, cfg, out);

    Update update = Update::absent(t);
    try {
      if (gate == nullptr || gate->decide(req) == Decision::Yes) {
        auto text = gen.generate(req);
        if (text) {
          auto trimmed = text::trim(*text);
          if (!trimmed.empty()) update.text = std::move(trimmed);
        }
        if (gate != nullptr && !update.present()) {
          throw GeneratorFailure(t, "gated generator returned ABSENT after a YES decision");
        }
      }
    } catch (const GeneratorFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw GeneratorFailure(t, e.what());
    }
    out.entries.push_back(std::move(update));
  }
  return out;
}

std::unique_ptr<Gate> reference_presence_gate(const MatchDataset& d) {
  return std::make_unique<ReferencePresenceGate>(d.reference);
}

}  // namespace livetl
