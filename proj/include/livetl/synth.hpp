#pragma once

// Seeded synthetic matches: a reference timeline of goal / substitution /
// card / commentary updates and a tweet stream that reacts to them, with
// hashtags and URLs sprinkled into the raw text. Used by the tests and the
// `livetl synth` command; not a model of real tweet statistics.

#include <cstdint>
#include <filesystem>
#include <string>

#include "livetl/core.hpp"

namespace livetl {

struct SynthConfig {
  std::string match_id = "synth-0001";
  std::uint64_t seed = 1;
  Minute first_minute = 0;
  Minute last_minute = 95;
  /// Chance that a minute carries a reference update.
  double update_probability = 0.3;
  int background_tweets_per_minute = 20;
  /// Extra tweets posted in the minutes after each reference update.
  int reaction_tweets = 30;
  /// Post one tweet whose text is exactly the reference update, inside its
  /// [t, t + 3] window.
  bool plant_reference = true;
  std::string kickoff = "2022-04-02T14:00:00+09:00";
};

/// Dataset with preprocessed tweet text; the tweets' raw_text carries the
/// hashtags and URLs that preprocessing removes.
MatchDataset synth_match(const SynthConfig& cfg);

/// Writes tweets.jsonl, reference.jsonl and manifest.json into `dir`
/// (created if needed) and returns the manifest path.
std::filesystem::path write_match_files(const MatchDataset& d, const std::filesystem::path& dir,
                                        const std::string& kickoff);

}  // namespace livetl
