#include "livetl/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <boost/regex.hpp>

#include "livetl/text.hpp"

namespace livetl {

using nlohmann::json;

namespace {

constexpr char32_t kFullWidthHash = 0xFF03;

bool starts_with_scheme(std::string_view s, std::size_t pos) {
  auto match = [&](std::string_view prefix) {
    if (s.size() - pos < prefix.size()) return false;
    for (std::size_t k = 0; k < prefix.size(); ++k) {
      char c = s[pos + k];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      if (c != prefix[k]) return false;
    }
    return true;
  };
  return match("http://") || match("https://");
}

std::string strip_once(std::string_view s, bool strip_urls, bool strip_hashtags) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) {
    if (strip_urls && starts_with_scheme(s, pos)) {
      while (pos < s.size()) {
        const auto d = text::decode(s, pos);
        if (text::is_space(d.cp)) break;
        pos += d.len;
      }
      continue;
    }
    const auto d = text::decode(s, pos);
    if (strip_hashtags && (d.cp == U'#' || d.cp == kFullWidthHash)) {
      std::size_t end = pos + d.len;
      while (end < s.size()) {
        const auto e = text::decode(s, end);
        if (text::is_space(e.cp) || text::is_hashtag_delimiter(e.cp)) break;
        end += e.len;
      }
      if (end > pos + d.len) {
        pos = end;
        continue;
      }
    }
    out.append(s.substr(pos, d.len));
    pos += d.len;
  }
  return out;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

IngestError malformed(std::size_t line, const std::string& what) {
  return IngestError(IngestError::Kind::MalformedRecord, line, 0,
                     "malformed record at line " + std::to_string(line) + ": " + what);
}

template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw malformed(number, e.what());
    }
    if (!record.is_object()) throw malformed(number, "expected a JSON object");
    fn(record, number);
  }
}

std::optional<Minute> json_minute(const json& v) {
  if (v.is_number_integer()) return v.get<Minute>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (!std::isfinite(x)) return std::nullopt;
    return static_cast<Minute>(std::floor(x));
  }
  return std::nullopt;
}

std::string tweet_id(const json& v, std::size_t line) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw malformed(line, "\"id\" must be a string");
}

Minute tweet_minute(const json& record, std::int64_t kickoff_ms, std::size_t line) {
  if (auto it = record.find("t"); it != record.end()) {
    if (auto m = json_minute(*it)) return *m;
    throw malformed(line, "\"t\" must be a number");
  }
  if (auto it = record.find("ts"); it != record.end()) {
    if (!it->is_string()) throw malformed(line, "\"ts\" must be an RFC3339 string");
    const auto ms = parse_rfc3339_ms(it->get_ref<const std::string&>());
    if (!ms) throw malformed(line, "unparseable timestamp");
    return floor_div(*ms - kickoff_ms, 60'000);
  }
  throw malformed(line, "record has neither \"t\" nor \"ts\"");
}

std::optional<std::string> update_text(const json& v, std::size_t line) {
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) throw malformed(line, "\"text\" must be a string or null");
  auto s = text::trim(v.get_ref<const std::string&>());
  if (s.empty() || s == "NaN") return std::nullopt;
  return s;
}

}  // namespace

void IngestConfig::validate() const {
  if (min_tweets < 0) throw std::invalid_argument("min_tweets must be >= 0");
  if (window_before_minutes < 0 || window_after_minutes < 0) {
    throw std::invalid_argument("window bounds must be >= 0");
  }
}

std::string preprocess_text(std::string_view raw, bool strip_urls, bool strip_hashtags) {
  std::string current = text::collapse_whitespace(strip_once(raw, strip_urls, strip_hashtags));
  for (;;) {
    auto next = text::collapse_whitespace(strip_once(current, strip_urls, strip_hashtags));
    if (next == current) return current;
    current = std::move(next);
  }
}

std::optional<std::int64_t> parse_rfc3339_ms(std::string_view s) {
  auto digits = [&](std::size_t pos, std::size_t n) -> std::optional<int> {
    if (pos + n > s.size()) return std::nullopt;
    int v = 0;
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + n, v);
    if (ec != std::errc{} || p != s.data() + pos + n) return std::nullopt;
    return v;
  };
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':') {
    return std::nullopt;
  }
  const auto y = digits(0, 4), mo = digits(5, 2), d = digits(8, 2);
  const auto h = digits(11, 2), mi = digits(14, 2), sec = digits(17, 2);
  if (!y || !mo || !d || !h || !mi || !sec) return std::nullopt;
  if (*h > 23 || *mi > 59 || *sec > 60) return std::nullopt;

  const std::chrono::year_month_day ymd{std::chrono::year{*y},
                                        std::chrono::month{static_cast<unsigned>(*mo)},
                                        std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;

  std::size_t pos = 19;
  std::int64_t millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t nd = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      if (nd < 3) millis = millis * 10 + (s[pos] - '0');
      ++nd;
      ++pos;
    }
    if (nd == 0) return std::nullopt;
    for (std::size_t k = nd; k < 3; ++k) millis *= 10;
  }

  std::int64_t offset_minutes = 0;
  if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
    ++pos;
  } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    const int sign = s[pos] == '-' ? -1 : 1;
    const auto oh = digits(pos + 1, 2), om = digits(pos + 4, 2);
    if (!oh || !om || pos + 3 >= s.size() || s[pos + 3] != ':') return std::nullopt;
    offset_minutes = sign * (*oh * 60 + *om);
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;

  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  const std::int64_t secs = static_cast<std::int64_t>(days) * 86'400 + *h * 3600 + *mi * 60 + *sec -
                            offset_minutes * 60;
  return secs * 1000 + millis;
}

Timeline load_reference(std::istream& reference_archive, const IngestConfig& cfg) {
  Timeline reference = read_timeline(reference_archive);
  if (reference.empty()) throw malformed(0, "reference archive has no updates");

  std::vector<boost::regex> exclusions;
  exclusions.reserve(cfg.exclusion_patterns.size());
  for (const auto& p : cfg.exclusion_patterns) {
    try {
      exclusions.emplace_back(p);
    } catch (const boost::regex_error& e) {
      throw std::invalid_argument("bad exclusion pattern '" + p + "': " + e.what());
    }
  }
  for (auto& u : reference.entries) {
    if (!u.present()) continue;
    for (const auto& re : exclusions) {
      if (boost::regex_search(*u.text, re)) {
        u.text.reset();
        break;
      }
    }
  }
  return reference;
}

Timeline load_reference(const MatchManifest& manifest, const IngestConfig& cfg) {
  std::ifstream in(manifest.reference);
  if (!in) throw malformed(0, "cannot open " + manifest.reference.string());
  return load_reference(in, cfg);
}

MatchDataset load_match(std::istream& tweet_archive, std::istream& reference_archive,
                        const IngestConfig& cfg, const MatchInfo& info) {
  cfg.validate();

  Timeline reference = load_reference(reference_archive, cfg);

  const Minute lo = -static_cast<Minute>(cfg.window_before_minutes);
  const Minute hi = reference.end_minute() + cfg.window_after_minutes;

  std::vector<Tweet> tweets;
  std::map<std::string, std::size_t> seen_ids;
  for_each_line(tweet_archive, [&](const json& record, std::size_t line) {
    auto id_it = record.find("id");
    auto text_it = record.find("text");
    if (id_it == record.end()) throw malformed(line, "missing \"id\"");
    if (text_it == record.end() || !text_it->is_string()) {
      throw malformed(line, "missing or non-string \"text\"");
    }
    Tweet t;
    t.id = tweet_id(*id_it, line);
    t.minute = tweet_minute(record, info.kickoff_ms, line);
    t.raw_text = text_it->get<std::string>();
    if (!seen_ids.emplace(t.id, line).second) throw malformed(line, "duplicate tweet id " + t.id);
    if (t.minute < lo || t.minute > hi) return;
    t.text = preprocess_text(t.raw_text, cfg.url_strip, cfg.hashtag_strip);
    tweets.push_back(std::move(t));
  });
  std::sort(tweets.begin(), tweets.end(), tweet_order);

  const auto surviving = static_cast<std::int64_t>(tweets.size());
  if (surviving <= cfg.min_tweets) {
    throw IngestError(IngestError::Kind::Volume, 0, surviving,
                      "match " + info.match_id + " has " + std::to_string(surviving) +
                          " tweets in window, needs more than " + std::to_string(cfg.min_tweets));
  }

  MatchDataset d;
  d.match_id = info.match_id;
  d.kickoff_ms = info.kickoff_ms;
  d.hashtags = info.hashtags;
  d.tweets = std::move(tweets);
  d.reference = std::move(reference);
  return d;
}

std::map<Minute, std::vector<Tweet>> bucket_by_minute(const std::vector<Tweet>& tweets) {
  std::map<Minute, std::vector<Tweet>> buckets;
  for (const auto& t : tweets) buckets[t.minute].push_back(t);
  for (auto& [minute, bucket] : buckets) {
    std::stable_sort(bucket.begin(), bucket.end(), tweet_order);
  }
  return buckets;
}

json serialize_tweet(const Tweet& t) {
  return json{{"id", t.id}, {"t", t.minute}, {"text", t.raw_text}};
}

json normalize_tweet_record(const json& record, std::int64_t kickoff_ms) {
  json out;
  out["id"] = tweet_id(record.at("id"), 0);
  out["t"] = tweet_minute(record, kickoff_ms, 0);
  out["text"] = record.at("text");
  return out;
}

MatchManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw malformed(0, "cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw malformed(0, path.string() + ": " + e.what());
  }
  auto field = [&](const char* key) -> const json& {
    if (!j.is_object() || !j.contains(key) || !j[key].is_string()) {
      throw malformed(0, path.string() + ": missing string field \"" + key + "\"");
    }
    return j[key];
  };

  MatchManifest m;
  m.match_id = field("match_id").get<std::string>();
  m.kickoff = field("kickoff").get<std::string>();
  const auto ko = parse_rfc3339_ms(m.kickoff);
  if (!ko) throw malformed(0, path.string() + ": bad kickoff timestamp");
  m.kickoff_ms = *ko;
  if (j.contains("hashtags")) {
    if (!j["hashtags"].is_array()) throw malformed(0, path.string() + ": hashtags must be a list");
    for (const auto& h : j["hashtags"]) {
      if (!h.is_string()) throw malformed(0, path.string() + ": hashtags must be strings");
      m.hashtags.push_back(h.get<std::string>());
    }
  }
  const auto base = path.parent_path();
  m.tweets = base / field("tweets").get<std::string>();
  m.reference = base / field("reference").get<std::string>();
  return m;
}

MatchDataset load_match(const MatchManifest& manifest, const IngestConfig& cfg) {
  std::ifstream tweets(manifest.tweets);
  if (!tweets) throw malformed(0, "cannot open " + manifest.tweets.string());
  std::ifstream reference(manifest.reference);
  if (!reference) throw malformed(0, "cannot open " + manifest.reference.string());
  return load_match(tweets, reference, cfg,
                    MatchInfo{manifest.match_id, manifest.kickoff_ms, manifest.hashtags});
}

void write_timeline(std::ostream& out, const Timeline& tl) {
  for (const auto& u : tl.entries) {
    json line{{"minute", u.minute}, {"text", u.present() ? json(*u.text) : json(nullptr)}};
    out << line.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
}

Timeline read_timeline(std::istream& in) {
  std::vector<Update> updates;
  std::set<Minute> minutes;
  for_each_line(in, [&](const json& record, std::size_t line) {
    auto m_it = record.find("minute");
    if (m_it == record.end() || !m_it->is_number_integer()) {
      throw malformed(line, "missing integer \"minute\"");
    }
    auto t_it = record.find("text");
    if (t_it == record.end()) throw malformed(line, "missing \"text\"");
    const auto minute = m_it->get<Minute>();
    if (!minutes.insert(minute).second) {
      throw malformed(line, "duplicate minute " + std::to_string(minute));
    }
    updates.push_back({minute, update_text(*t_it, line)});
  });
  return Timeline::from_updates(std::move(updates));
}

Timeline read_timeline_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw malformed(0, "cannot open " + path.string());
  return read_timeline(in);
}

}  // namespace livetl
