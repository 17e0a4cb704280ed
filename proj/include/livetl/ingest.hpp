#pragma once

// Archive readers and the tweet/reference preprocessing applied before any
// generation or evaluation.
//
// Tweet archive (JSON Lines):     {"id": str, "t": int | "ts": RFC3339, "text": str}
// Reference archive (JSON Lines): {"minute": int, "text": str | null}
// Match manifest (JSON):          {"match_id", "kickoff", "hashtags", "tweets", "reference"}
//
// Relative paths in a manifest resolve against the manifest's directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "livetl/core.hpp"

namespace livetl {

struct IngestConfig {
  /// A match is kept only when strictly more tweets than this survive.
  std::int64_t min_tweets = 3200;
  int window_before_minutes = 60;
  int window_after_minutes = 60;
  /// Regular expressions; a reference update matching any of them becomes
  /// ABSENT. Typical entries: "通算", "lifetime", "last week".
  std::vector<std::string> exclusion_patterns;
  bool hashtag_strip = true;
  bool url_strip = true;

  void validate() const;
};

class IngestError : public std::runtime_error {
 public:
  enum class Kind { MalformedRecord, Volume };

  IngestError(Kind kind, std::size_t line, std::int64_t surviving, const std::string& what)
      : std::runtime_error(what), kind_(kind), line_(line), surviving_(surviving) {}

  Kind kind() const { return kind_; }
  /// 1-based line of the offending record, 0 when not tied to a line.
  std::size_t line() const { return line_; }
  /// Number of tweets that survived the window filter (VOLUME only).
  std::int64_t surviving() const { return surviving_; }

 private:
  Kind kind_;
  std::size_t line_;
  std::int64_t surviving_;
};

/// Removes URL tokens (http:// or https://, case-insensitive scheme, up to
/// the next whitespace) and hashtag tokens ('#' or U+FF03 followed by a
/// non-empty run of characters that are neither whitespace nor hashtag
/// delimiters), collapses whitespace runs to one space, and trims. Removal
/// repeats until nothing changes, so the function is idempotent.
std::string preprocess_text(std::string_view raw, bool strip_urls = true,
                            bool strip_hashtags = true);

struct MatchInfo {
  std::string match_id;
  std::int64_t kickoff_ms = 0;
  std::vector<std::string> hashtags;
};

/// Parses both archives, applies preprocessing and filters, and returns a
/// validated dataset. Throws IngestError (MalformedRecord with the 1-based
/// line, or Volume when surviving tweets <= min_tweets).
MatchDataset load_match(std::istream& tweet_archive, std::istream& reference_archive,
                        const IngestConfig& cfg, const MatchInfo& info);

std::map<Minute, std::vector<Tweet>> bucket_by_minute(const std::vector<Tweet>& tweets);

/// Parses "YYYY-MM-DDTHH:MM:SS[.fff][Z|+HH:MM|-HH:MM]" into Unix epoch ms.
std::optional<std::int64_t> parse_rfc3339_ms(std::string_view s);

/// Archive record for a tweet as it would be re-emitted: {"id", "t", "text"}
/// with the raw body.
nlohmann::json serialize_tweet(const Tweet& t);

/// Canonical form of a well-formed tweet record: "ts" replaced by the
/// kickoff-relative minute "t", only the known keys retained.
nlohmann::json normalize_tweet_record(const nlohmann::json& record, std::int64_t kickoff_ms);

struct MatchManifest {
  std::string match_id;
  std::int64_t kickoff_ms = 0;
  std::string kickoff;  // as written
  std::vector<std::string> hashtags;
  std::filesystem::path tweets;
  std::filesystem::path reference;
};

/// Throws IngestError(MalformedRecord) on a missing or ill-typed field.
MatchManifest load_manifest(const std::filesystem::path& path);

/// Reads a reference archive and blanks updates matching an exclusion
/// pattern. Throws IngestError(MalformedRecord), including for an empty
/// archive, since the match span is derived from it.
Timeline load_reference(std::istream& reference_archive, const IngestConfig& cfg);
Timeline load_reference(const MatchManifest& manifest, const IngestConfig& cfg);

/// Opens the archives named by the manifest and calls load_match.
MatchDataset load_match(const MatchManifest& manifest, const IngestConfig& cfg);

// Timeline JSON Lines: one {"minute": int, "text": str | null} per minute.

void write_timeline(std::ostream& out, const Timeline& tl);
/// Accepts the string "NaN" as ABSENT. Gaps are filled with ABSENT.
/// Throws IngestError(MalformedRecord) on bad lines or duplicate minutes.
Timeline read_timeline(std::istream& in);
Timeline read_timeline_file(const std::filesystem::path& path);

}  // namespace livetl
