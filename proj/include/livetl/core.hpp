#pragma once

// Domain types shared by every stage: tweets, per-minute updates, dense
// timelines, per-match datasets, and the pipeline wiring configuration.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace livetl {

/// Minutes relative to kickoff. Negative values are before kickoff.
using Minute = std::int64_t;

struct Tweet {
  std::string id;
  Minute minute = 0;
  std::string text;      // URLs and hashtags removed
  std::string raw_text;  // as collected

  friend bool operator==(const Tweet&, const Tweet&) = default;
};

/// Strict weak order used everywhere tweets are sorted: (minute, id).
bool tweet_order(const Tweet& a, const Tweet& b);

/// One timeline slot. `text` empty-optional is the ABSENT ("NaN") value.
struct Update {
  Minute minute = 0;
  std::optional<std::string> text;

  bool present() const { return text.has_value(); }
  static Update absent(Minute m) { return {m, std::nullopt}; }

  friend bool operator==(const Update&, const Update&) = default;
};

/// Minute-indexed sequence of updates. A well-formed timeline is dense:
/// entries[k].minute == start_minute + k. `from_updates` always produces a
/// dense timeline; the raw aggregate form exists so validation can report
/// on malformed inputs.
struct Timeline {
  Minute start_minute = 0;
  std::vector<Update> entries;

  /// Builds a dense timeline from an unordered set of updates. Missing
  /// minutes between the smallest and largest key are filled with ABSENT.
  /// Throws std::invalid_argument on duplicate minutes.
  static Timeline from_updates(std::vector<Update> updates);

  /// Dense all-ABSENT timeline over [first, last].
  static Timeline empty_span(Minute first, Minute last);

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  Minute end_minute() const;  // last minute; requires !empty()
  bool is_dense() const;
  bool contains(Minute m) const;
  const Update& at(Minute m) const;  // throws std::out_of_range
  std::size_t present_count() const;

  friend bool operator==(const Timeline&, const Timeline&) = default;
};

struct MatchDataset {
  std::string match_id;
  std::int64_t kickoff_ms = 0;  // Unix epoch, milliseconds
  std::vector<Tweet> tweets;  // sorted by (minute, id)
  Timeline reference;
  std::vector<std::string> hashtags;
};

enum class Variant { Base, Clf, Cxt, ClfCxt };
enum class ContextSource { Generated, Reference };

bool uses_gate(Variant v);
bool uses_context(Variant v);

struct PipelineConfig {
  Variant variant = Variant::Base;
  int tweet_lookahead_minutes = 3;
  int context_lookback_minutes = 4;
  ContextSource context_source = ContextSource::Generated;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct Violation {
  std::string field;
  std::string record;
  std::string message;
};

/// Checks every MatchDataset invariant and reports each breach as data.
/// Tweet minutes must lie in [-window_before, end + window_after] where end
/// is the reference timeline's last minute.
std::vector<Violation> validate_dataset(const MatchDataset& d,
                                        int window_before_minutes = 60,
                                        int window_after_minutes = 60);

std::string to_string(Variant v);
std::string to_string(ContextSource s);
std::optional<Variant> parse_variant(std::string_view s);
std::optional<ContextSource> parse_context_source(std::string_view s);

}  // namespace livetl
