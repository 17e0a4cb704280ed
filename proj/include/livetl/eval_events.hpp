#pragma once

// Key-event scoring: pull goals, substitutions, and cards out of update text
// with user-supplied patterns, then match reference and generated events
// within a +/-window minute tolerance.
//
// LENIENT counts a match on event kind alone. STRICT also requires the kind's
// attributes to agree (goal: scorer; card: card_type and player;
// substitution: player_out and player_in). UNKNOWN never equals anything.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/regex.hpp>
#include <json.hpp>

#include "livetl/core.hpp"
#include "livetl/eval_align.hpp"

namespace livetl {

enum class EventKind { Goal, Substitution, Card };
inline constexpr std::array<EventKind, 3> kEventKinds{EventKind::Goal, EventKind::Substitution,
                                                      EventKind::Card};

std::string to_string(EventKind k);
/// Attribute keys permitted for a kind.
const std::vector<std::string>& attr_keys(EventKind k);

/// Missing optional = UNKNOWN.
using EventAttrs = std::map<std::string, std::optional<std::string>>;

struct EventRecord {
  Minute minute = 0;
  EventKind kind = EventKind::Goal;
  EventAttrs attrs;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// Makes a record with every kind-specific key present (UNKNOWN unless given).
EventRecord make_event(Minute minute, EventKind kind, EventAttrs given = {});

struct EventPattern {
  std::string source;
  boost::regex regex;
  std::map<std::string, std::string> fixed_attrs;
};

class EventPatternSet {
 public:
  /// Compiles and checks a pattern; throws std::invalid_argument when it does
  /// not compile or names a capture group / fixed attr outside the kind's keys.
  void add(EventKind kind, const std::string& pattern,
           std::map<std::string, std::string> fixed_attrs = {});

  const std::vector<EventPattern>& patterns(EventKind kind) const;

  /// {"goal": [...], "card": [...], "substitution": [...]}; entries are
  /// pattern strings or {"pattern": str, "attrs": {key: value}}.
  static EventPatternSet from_json(const nlohmann::json& j);
  static EventPatternSet load(const std::filesystem::path& path);

 private:
  std::map<EventKind, std::vector<EventPattern>> by_kind_;
};

/// Names of the (?<name>...), (?P<name>...) and (?'name'...) groups.
std::vector<std::string> capture_group_names(std::string_view pattern);

/// "yellow" | "red" | nullopt.
std::optional<std::string> normalize_card_type(std::string_view captured);

/// For each present update and each kind, the first matching pattern yields
/// one event. Output is ordered by minute, then kind.
std::vector<EventRecord> extract_events(const Timeline& tl, const EventPatternSet& patterns);

enum class MatchMode { Lenient, Strict };

struct EventCounts {
  std::int64_t matched = 0;
  std::int64_t generated = 0;
  std::int64_t reference = 0;
  Prf scores;
};

struct EventScores {
  MatchMode mode = MatchMode::Lenient;
  std::map<EventKind, EventCounts> per_kind;
  EventCounts total;
  /// Matched (reference index, generated index) pairs into the inputs.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// One-to-one matching per kind. Reference events are visited in ascending
/// minute order; each takes the earliest unmatched generated event of the
/// same kind (and, in STRICT mode, equal attributes) within
/// [minute - window, minute + window]. For equal-width windows this yields
/// a maximum matching, so STRICT never beats LENIENT.
EventScores match_events(const std::vector<EventRecord>& ref, const std::vector<EventRecord>& gen,
                         MatchMode mode, int window = 2);

/// Adds the counts of `b` into `a` and recomputes ratios.
void accumulate(EventScores& a, const EventScores& b);

nlohmann::json to_json(const EventScores& s);
nlohmann::json to_json(const EventRecord& e);

std::string to_string(MatchMode m);
std::optional<MatchMode> parse_match_mode(std::string_view s);

}  // namespace livetl
