#include "livetl/eval_events.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "livetl/text.hpp"

namespace livetl {

using nlohmann::json;

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Goal: return "goal";
    case EventKind::Substitution: return "substitution";
    case EventKind::Card: return "card";
  }
  return "goal";
}

const std::vector<std::string>& attr_keys(EventKind k) {
  static const std::vector<std::string> goal{"scorer"};
  static const std::vector<std::string> sub{"player_out", "player_in"};
  static const std::vector<std::string> card{"card_type", "player"};
  switch (k) {
    case EventKind::Goal: return goal;
    case EventKind::Substitution: return sub;
    case EventKind::Card: return card;
  }
  return goal;
}

EventRecord make_event(Minute minute, EventKind kind, EventAttrs given) {
  EventRecord e{minute, kind, {}};
  for (const auto& key : attr_keys(kind)) {
    auto it = given.find(key);
    e.attrs[key] = it == given.end() ? std::nullopt : it->second;
  }
  return e;
}

std::vector<std::string> capture_group_names(std::string_view p) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k + 2 < p.size(); ++k) {
    if (p[k] == '\\') {
      ++k;  // skip the escaped character
      continue;
    }
    if (p[k] != '(' || p[k + 1] != '?') continue;
    std::size_t start = k + 2;
    char close = '>';
    if (p[start] == 'P' && start + 1 < p.size() && p[start + 1] == '<') {
      start += 2;
    } else if (p[start] == '<') {
      if (start + 1 < p.size() && (p[start + 1] == '=' || p[start + 1] == '!')) continue;
      start += 1;
    } else if (p[start] == '\'') {
      start += 1;
      close = '\'';
    } else {
      continue;
    }
    const auto end = p.find(close, start);
    if (end == std::string_view::npos) break;
    names.emplace_back(p.substr(start, end - start));
    k = end;
  }
  return names;
}

std::optional<std::string> normalize_card_type(std::string_view captured) {
  const auto s = text::ascii_lower(text::trim(captured));
  if (s.find("yellow") != std::string::npos || s == "y" || s.find("イエロー") != std::string::npos ||
      s.find("警告") != std::string::npos) {
    return std::string("yellow");
  }
  if (s.find("red") != std::string::npos || s == "r" || s.find("レッド") != std::string::npos ||
      s.find("退場") != std::string::npos) {
    return std::string("red");
  }
  return std::nullopt;
}

void EventPatternSet::add(EventKind kind, const std::string& pattern,
                          std::map<std::string, std::string> fixed_attrs) {
  const auto& keys = attr_keys(kind);
  auto allowed = [&](const std::string& name) {
    return std::find(keys.begin(), keys.end(), name) != keys.end();
  };
  for (const auto& name : capture_group_names(pattern)) {
    if (!allowed(name)) {
      throw std::invalid_argument("pattern for " + to_string(kind) + " uses capture group '" +
                                  name + "' which is not an attribute of that kind");
    }
  }
  for (auto& [key, value] : fixed_attrs) {
    if (!allowed(key)) {
      throw std::invalid_argument("fixed attr '" + key + "' is not an attribute of " +
                                  to_string(kind));
    }
    if (key == "card_type") {
      auto norm = normalize_card_type(value);
      if (!norm) throw std::invalid_argument("card_type must be yellow or red, got '" + value + "'");
      value = *norm;
    }
  }
  EventPattern p;
  p.source = pattern;
  try {
    p.regex = boost::regex(pattern, boost::regex::perl);
  } catch (const boost::regex_error& e) {
    throw std::invalid_argument("pattern '" + pattern + "' does not compile: " + e.what());
  }
  p.fixed_attrs = std::move(fixed_attrs);
  by_kind_[kind].push_back(std::move(p));
}

const std::vector<EventPattern>& EventPatternSet::patterns(EventKind kind) const {
  static const std::vector<EventPattern> none;
  auto it = by_kind_.find(kind);
  return it == by_kind_.end() ? none : it->second;
}

EventPatternSet EventPatternSet::from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("pattern file must hold a JSON object");
  EventPatternSet set;
  for (auto kind : kEventKinds) {
    const auto name = to_string(kind);
    if (!j.contains(name)) continue;
    const auto& list = j.at(name);
    if (!list.is_array()) throw std::invalid_argument("\"" + name + "\" must be a list");
    for (const auto& entry : list) {
      if (entry.is_string()) {
        set.add(kind, entry.get<std::string>());
      } else if (entry.is_object() && entry.contains("pattern") && entry["pattern"].is_string()) {
        std::map<std::string, std::string> fixed;
        if (entry.contains("attrs")) {
          for (const auto& [key, value] : entry["attrs"].items()) {
            if (!value.is_string()) throw std::invalid_argument("attr values must be strings");
            fixed[key] = value.get<std::string>();
          }
        }
        set.add(kind, entry["pattern"].get<std::string>(), std::move(fixed));
      } else {
        throw std::invalid_argument("pattern entries must be strings or {\"pattern\": ...}");
      }
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "goal" && key != "card" && key != "substitution") {
      throw std::invalid_argument("unknown event kind '" + key + "' in pattern file");
    }
  }
  return set;
}

EventPatternSet EventPatternSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open pattern file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return from_json(j);
}

std::vector<EventRecord> extract_events(const Timeline& tl, const EventPatternSet& patterns) {
  std::vector<EventRecord> out;
  for (const auto& u : tl.entries) {
    if (!u.present()) continue;
    for (auto kind : kEventKinds) {
      for (const auto& p : patterns.patterns(kind)) {
        boost::smatch m;
        if (!boost::regex_search(*u.text, m, p.regex)) continue;
        EventAttrs attrs;
        for (const auto& key : attr_keys(kind)) {
          std::optional<std::string> value;
          if (auto fixed = p.fixed_attrs.find(key); fixed != p.fixed_attrs.end()) {
            value = fixed->second;
          } else if (const auto& sub = m[key.c_str()]; sub.matched) {
            auto captured = text::trim(sub.str());
            if (!captured.empty()) value = std::move(captured);
          }
          if (key == "card_type" && value) value = normalize_card_type(*value);
          attrs[key] = std::move(value);
        }
        out.push_back(make_event(u.minute, kind, std::move(attrs)));
        break;
      }
    }
  }
  return out;
}

namespace {

bool fully_known(const EventRecord& e) {
  return std::all_of(e.attrs.begin(), e.attrs.end(),
                     [](const auto& kv) { return kv.second.has_value(); });
}

std::vector<std::size_t> canonical_order(const std::vector<EventRecord>& events) {
  std::vector<std::size_t> idx(events.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = events[a];
    const auto& y = events[b];
    if (x.minute != y.minute) return x.minute < y.minute;
    return x.attrs < y.attrs;
  });
  return idx;
}

void refresh(EventCounts& c) { c.scores = prf(c.matched, c.generated, c.reference); }

}  // namespace

EventScores match_events(const std::vector<EventRecord>& ref, const std::vector<EventRecord>& gen,
                         MatchMode mode, int window) {
  if (window < 0) throw std::invalid_argument("event window must be >= 0");
  EventScores out;
  out.mode = mode;
  for (auto kind : kEventKinds) out.per_kind[kind] = {};

  const auto ref_order = canonical_order(ref);
  const auto gen_order = canonical_order(gen);

  for (auto kind : kEventKinds) {
    auto& counts = out.per_kind[kind];
    // Partition each side into classes of mutually matchable events.
    std::map<EventAttrs, std::vector<std::size_t>> ref_classes;
    std::map<EventAttrs, std::vector<std::size_t>> gen_classes;
    for (auto i : ref_order) {
      if (ref[i].kind != kind) continue;
      ++counts.reference;
      if (mode == MatchMode::Lenient) ref_classes[{}].push_back(i);
      else if (fully_known(ref[i])) ref_classes[ref[i].attrs].push_back(i);
    }
    for (auto i : gen_order) {
      if (gen[i].kind != kind) continue;
      ++counts.generated;
      if (mode == MatchMode::Lenient) gen_classes[{}].push_back(i);
      else if (fully_known(gen[i])) gen_classes[gen[i].attrs].push_back(i);
    }

    for (const auto& [key, refs] : ref_classes) {
      auto found = gen_classes.find(key);
      if (found == gen_classes.end()) continue;
      const auto& gens = found->second;
      std::size_t next = 0;
      for (auto r : refs) {
        const Minute lo = ref[r].minute - window;
        const Minute hi = ref[r].minute + window;
        while (next < gens.size() && gen[gens[next]].minute < lo) ++next;
        if (next < gens.size() && gen[gens[next]].minute <= hi) {
          out.pairs.emplace_back(r, gens[next]);
          ++counts.matched;
          ++next;
        }
      }
    }
    refresh(counts);
    out.total.matched += counts.matched;
    out.total.generated += counts.generated;
    out.total.reference += counts.reference;
  }
  refresh(out.total);
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

void accumulate(EventScores& a, const EventScores& b) {
  for (const auto& [kind, c] : b.per_kind) {
    auto& dst = a.per_kind[kind];
    dst.matched += c.matched;
    dst.generated += c.generated;
    dst.reference += c.reference;
    refresh(dst);
  }
  a.total.matched += b.total.matched;
  a.total.generated += b.total.generated;
  a.total.reference += b.total.reference;
  refresh(a.total);
}

namespace {

json counts_json(const EventCounts& c) {
  return json{{"matched", c.matched},
              {"generated", c.generated},
              {"reference", c.reference},
              {"precision", c.scores.precision},
              {"recall", c.scores.recall},
              {"f1", c.scores.f1}};
}

}  // namespace

json to_json(const EventScores& s) {
  json kinds = json::object();
  for (const auto& [kind, c] : s.per_kind) kinds[to_string(kind)] = counts_json(c);
  return json{{"mode", to_string(s.mode)}, {"per_kind", std::move(kinds)},
              {"total", counts_json(s.total)}};
}

json to_json(const EventRecord& e) {
  json attrs = json::object();
  for (const auto& [key, value] : e.attrs) attrs[key] = value ? json(*value) : json(nullptr);
  return json{{"minute", e.minute}, {"kind", to_string(e.kind)}, {"attrs", std::move(attrs)}};
}

std::string to_string(MatchMode m) { return m == MatchMode::Lenient ? "lenient" : "strict"; }

std::optional<MatchMode> parse_match_mode(std::string_view s) {
  if (s == "lenient") return MatchMode::Lenient;
  if (s == "strict") return MatchMode::Strict;
  return std::nullopt;
}

}  // namespace livetl
