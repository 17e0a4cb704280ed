#include "livetl/synth.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <random>

#include <fmt/format.h>
#include <json.hpp>

#include "livetl/ingest.hpp"

namespace livetl {

namespace {

constexpr std::array kPlayers{"Fujita",  "Koroki", "Ogashiwa", "MJunio", "Nakagawa", "Elber",
                              "Nishimura", "Kida",  "Kobayashi", "Leo",   "Miyaichi", "Sakai"};
constexpr std::array kChatter{"what a game", "come on",    "nice pass",   "so close",
                              "great save",  "defence holding", "pressing hard", "crowd is loud",
                              "unlucky",     "keep going", "counter attack", "corner kick"};
constexpr std::array kCommentary{"Corner kick for the home side.",
                                 "Shot from distance goes wide.",
                                 "Free kick in a dangerous position.",
                                 "Great save by the keeper.",
                                 "Offside flag goes up."};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  template <typename Array>
  const char* pick(const Array& a) {
    return a[below(a.size())];
  }

 private:
  std::mt19937_64 engine_;
};

std::string reference_text(Rng& rng, Minute minute) {
  switch (rng.below(4)) {
    case 0:
      return fmt::format("GOAL! {} scores, {}-{}.", rng.pick(kPlayers), rng.below(3) + 1,
                         rng.below(3));
    case 1:
      return fmt::format("{} {} OUT → {} {} IN", rng.below(30) + 1, rng.pick(kPlayers),
                         rng.below(30) + 1, rng.pick(kPlayers));
    case 2:
      return fmt::format("{} card for {}.", rng.below(4) == 0 ? "Red" : "Yellow",
                         rng.pick(kPlayers));
    default:
      return fmt::format("{} ({}')", rng.pick(kCommentary), minute);
  }
}

std::string decorate(Rng& rng, const std::string& body, const std::string& hashtag) {
  std::string raw = body;
  if (rng.below(2) == 0) raw += " #" + hashtag;
  if (rng.below(4) == 0) raw += fmt::format(" https://t.co/{:x}", rng.below(1u << 20));
  if (rng.below(5) == 0) raw = "＃jleague " + raw;
  return raw;
}

}  // namespace

MatchDataset synth_match(const SynthConfig& cfg) {
  Rng rng(cfg.seed);
  MatchDataset d;
  d.match_id = cfg.match_id;
  d.kickoff_ms = parse_rfc3339_ms(cfg.kickoff).value_or(0);
  d.hashtags = {"jleague", "synth"};

  std::vector<Update> updates;
  for (Minute m = cfg.first_minute; m <= cfg.last_minute; ++m) {
    if (m == cfg.first_minute || m == cfg.last_minute || rng.unit() < cfg.update_probability) {
      updates.push_back({m, reference_text(rng, m)});
    } else {
      updates.push_back(Update::absent(m));
    }
  }
  d.reference = Timeline::from_updates(std::move(updates));

  std::size_t serial = 0;
  auto add_tweet = [&](Minute minute, const std::string& body) {
    Tweet t;
    t.id = fmt::format("{}-{:06}", cfg.match_id, serial++);
    t.minute = minute;
    t.raw_text = decorate(rng, body, "synth");
    t.text = preprocess_text(t.raw_text);
    d.tweets.push_back(std::move(t));
  };

  for (Minute m = cfg.first_minute - 30; m <= cfg.last_minute + 30; ++m) {
    const int n = cfg.background_tweets_per_minute / 2 +
                  static_cast<int>(rng.below(static_cast<std::size_t>(cfg.background_tweets_per_minute) + 1));
    for (int k = 0; k < n; ++k) {
      add_tweet(m, fmt::format("{} {}", rng.pick(kChatter), rng.pick(kPlayers)));
    }
  }
  for (const auto& u : d.reference.entries) {
    if (!u.present()) continue;
    for (int k = 0; k < cfg.reaction_tweets; ++k) {
      const Minute at = u.minute + static_cast<Minute>(rng.below(4));
      // Reactions reuse a few words of the update so oracles have signal.
      const auto& ref = *u.text;
      auto cut = std::min(ref.size(), static_cast<std::size_t>(8 + rng.below(12)));
      while (cut < ref.size() && (static_cast<unsigned char>(ref[cut]) & 0xC0) == 0x80) --cut;
      add_tweet(at, fmt::format("{} {}", ref.substr(0, cut), rng.pick(kChatter)));
    }
    if (cfg.plant_reference) {
      Tweet t;
      t.id = fmt::format("{}-{:06}", cfg.match_id, serial++);
      t.minute = u.minute + static_cast<Minute>(rng.below(4));
      t.raw_text = *u.text;
      t.text = preprocess_text(t.raw_text);
      d.tweets.push_back(std::move(t));
    }
  }
  std::sort(d.tweets.begin(), d.tweets.end(), tweet_order);
  return d;
}

std::filesystem::path write_match_files(const MatchDataset& d, const std::filesystem::path& dir,
                                        const std::string& kickoff) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "tweets.jsonl");
    for (const auto& t : d.tweets) out << serialize_tweet(t).dump() << '\n';
  }
  {
    std::ofstream out(dir / "reference.jsonl");
    write_timeline(out, d.reference);
  }
  const auto manifest = dir / "manifest.json";
  nlohmann::json j{{"match_id", d.match_id},
                   {"kickoff", kickoff},
                   {"hashtags", d.hashtags},
                   {"tweets", "tweets.jsonl"},
                   {"reference", "reference.jsonl"}};
  std::ofstream(manifest) << j.dump(2) << '\n';
  return manifest;
}

}  // namespace livetl
