#include "livetl/core.hpp"

#include <algorithm>
#include <stdexcept>

#include "livetl/ingest.hpp"
#include "livetl/text.hpp"

namespace livetl {

bool tweet_order(const Tweet& a, const Tweet& b) {
  if (a.minute != b.minute) return a.minute < b.minute;
  return a.id < b.id;
}

Timeline Timeline::from_updates(std::vector<Update> updates) {
  Timeline tl;
  if (updates.empty()) return tl;
  std::sort(updates.begin(), updates.end(),
            [](const Update& a, const Update& b) { return a.minute < b.minute; });
  for (std::size_t k = 1; k < updates.size(); ++k) {
    if (updates[k].minute == updates[k - 1].minute) {
      throw std::invalid_argument("duplicate update at minute " +
                                  std::to_string(updates[k].minute));
    }
  }
  tl = empty_span(updates.front().minute, updates.back().minute);
  for (auto& u : updates) {
    tl.entries[static_cast<std::size_t>(u.minute - tl.start_minute)] = std::move(u);
  }
  return tl;
}

Timeline Timeline::empty_span(Minute first, Minute last) {
  Timeline tl;
  tl.start_minute = first;
  if (last < first) return tl;
  tl.entries.reserve(static_cast<std::size_t>(last - first + 1));
  for (Minute m = first; m <= last; ++m) tl.entries.push_back(Update::absent(m));
  return tl;
}

Minute Timeline::end_minute() const {
  if (entries.empty()) throw std::logic_error("end_minute of an empty timeline");
  return start_minute + static_cast<Minute>(entries.size()) - 1;
}

bool Timeline::is_dense() const {
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].minute != start_minute + static_cast<Minute>(k)) return false;
  }
  return true;
}

bool Timeline::contains(Minute m) const {
  return !entries.empty() && m >= start_minute &&
         m < start_minute + static_cast<Minute>(entries.size());
}

const Update& Timeline::at(Minute m) const {
  if (!contains(m)) throw std::out_of_range("minute " + std::to_string(m) + " outside timeline");
  return entries[static_cast<std::size_t>(m - start_minute)];
}

std::size_t Timeline::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const Update& u) { return u.present(); }));
}

bool uses_gate(Variant v) { return v == Variant::Clf || v == Variant::ClfCxt; }
bool uses_context(Variant v) { return v == Variant::Cxt || v == Variant::ClfCxt; }

void PipelineConfig::validate() const {
  if (tweet_lookahead_minutes < 0) {
    throw std::invalid_argument("tweet_lookahead_minutes must be >= 0");
  }
  if (uses_context(variant) && context_lookback_minutes < 1) {
    throw std::invalid_argument("context_lookback_minutes must be >= 1 for context variants");
  }
}

std::vector<Violation> validate_dataset(const MatchDataset& d, int window_before_minutes,
                                        int window_after_minutes) {
  std::vector<Violation> out;
  auto add = [&](std::string field, std::string record, std::string message) {
    out.push_back({std::move(field), std::move(record), std::move(message)});
  };

  const auto& ref = d.reference;
  for (std::size_t k = 0; k < ref.entries.size(); ++k) {
    const auto& u = ref.entries[k];
    const Minute expected = ref.start_minute + static_cast<Minute>(k);
    if (u.minute != expected) {
      add("reference.entries", "minute " + std::to_string(u.minute),
          "expected minute " + std::to_string(expected) + " (timeline not dense)");
      break;  // every later entry is shifted too; one report per gap
    }
  }
  for (const auto& u : ref.entries) {
    if (u.present() && text::trim(*u.text).empty()) {
      add("reference.entries", "minute " + std::to_string(u.minute),
          "present update has empty text");
    }
  }

  for (std::size_t k = 1; k < d.tweets.size(); ++k) {
    if (!tweet_order(d.tweets[k - 1], d.tweets[k])) {
      add("tweets", "id " + d.tweets[k].id, "tweets not strictly sorted by (minute, id)");
    }
  }

  if (!ref.entries.empty()) {
    const Minute lo = -static_cast<Minute>(window_before_minutes);
    const Minute hi = ref.entries.back().minute + window_after_minutes;
    for (const auto& t : d.tweets) {
      if (t.minute < lo || t.minute > hi) {
        add("tweets", "id " + t.id,
            "minute " + std::to_string(t.minute) + " outside window [" + std::to_string(lo) +
                ", " + std::to_string(hi) + "]");
      }
    }
  }

  for (const auto& t : d.tweets) {
    if (preprocess_text(t.text) != t.text) {
      add("tweets", "id " + t.id, "text still contains a URL, hashtag or whitespace run");
    }
  }
  return out;
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Base: return "base";
    case Variant::Clf: return "clf";
    case Variant::Cxt: return "cxt";
    case Variant::ClfCxt: return "clf_cxt";
  }
  return "base";
}

std::string to_string(ContextSource s) {
  return s == ContextSource::Generated ? "generated" : "reference";
}

std::optional<Variant> parse_variant(std::string_view s) {
  if (s == "base") return Variant::Base;
  if (s == "clf") return Variant::Clf;
  if (s == "cxt") return Variant::Cxt;
  if (s == "clf_cxt") return Variant::ClfCxt;
  return std::nullopt;
}

std::optional<ContextSource> parse_context_source(std::string_view s) {
  if (s == "generated") return ContextSource::Generated;
  if (s == "reference") return ContextSource::Reference;
  return std::nullopt;
}

}  // namespace livetl
