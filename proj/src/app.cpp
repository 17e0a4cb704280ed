#include "livetl/app.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "livetl/pipeline.hpp"

namespace livetl::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string dump(const json& j, int indent = 2) {
  return j.dump(indent, ' ', false, json::error_handler_t::replace);
}

void reject_unknown_keys(const json& j, const std::string& where,
                         std::initializer_list<const char*> known) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return key == k; });
    if (!ok) throw std::invalid_argument("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename Parse, typename T>
void read_enum(const json& j, const char* key, Parse parse, T& dst) {
  if (!j.contains(key)) return;
  std::string s;
  read_field(j, key, s);
  auto v = parse(s);
  if (!v) throw std::invalid_argument(std::string("bad value for '") + key + "': " + s);
  dst = *v;
}

/// File name for a match's timeline; match ids are not trusted as paths.
std::string timeline_file_name(const std::string& match_id) {
  std::string out;
  for (char c : match_id) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '-' || c == '_' || c == '.';
    out.push_back(safe ? c : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out + ".jsonl";
}

GateKind default_gate(GeneratorKind k) {
  return k == GeneratorKind::Bridge ? GateKind::Bridge : GateKind::Reference;
}

struct Wiring {
  std::unique_ptr<Generator> generator;
  std::unique_ptr<Gate> gate;
};

Wiring wire(const MatchDataset& d, const RunOptions& opts) {
  const auto& spec = opts.generator;
  std::shared_ptr<BridgeClient> client;
  auto bridge = [&] {
    if (!client) client = std::make_shared<BridgeClient>(spec.bridge);
    return client;
  };

  Wiring w;
  switch (spec.kind) {
    case GeneratorKind::Echo:
      w.generator = std::make_unique<EchoGenerator>();
      break;
    case GeneratorKind::Oracle:
      w.generator = std::make_unique<OracleGenerator>(d.reference, spec.oracle);
      break;
    case GeneratorKind::Bridge:
      w.generator = std::make_unique<BridgeGenerator>(bridge());
      break;
  }
  if (uses_gate(opts.pipeline.variant)) {
    switch (spec.gate.value_or(default_gate(spec.kind))) {
      case GateKind::Reference:
        w.gate = reference_presence_gate(d);
        break;
      case GateKind::Burst:
        w.gate = std::make_unique<BurstGate>(count_by_minute(d.tweets), spec.burst);
        break;
      case GateKind::Bridge:
        w.gate = std::make_unique<BridgeGate>(bridge());
        break;
    }
  }
  return w;
}

enum class Outcome { Ok, Rejected, Malformed, GeneratorFailed };

struct MatchRun {
  fs::path manifest;
  std::string match_id;
  Outcome outcome = Outcome::Ok;
  std::string reason;
  std::int64_t tweets = 0;
  Timeline timeline;
};

MatchRun run_one(const fs::path& manifest_path, const RunOptions& opts) {
  MatchRun r;
  r.manifest = manifest_path;
  try {
    const auto manifest = load_manifest(manifest_path);
    r.match_id = manifest.match_id;
    const auto d = load_match(manifest, opts.ingest);
    r.tweets = static_cast<std::int64_t>(d.tweets.size());
    auto w = wire(d, opts);
    spdlog::debug("running {} ({} tweets, {} minutes)", d.match_id, d.tweets.size(),
                  d.reference.size());
    r.timeline = run_match(d, opts.pipeline, *w.generator, w.gate.get());
  } catch (const IngestError& e) {
    r.outcome = e.kind() == IngestError::Kind::Volume ? Outcome::Rejected : Outcome::Malformed;
    r.reason = e.what();
    r.tweets = e.surviving();
  } catch (const GeneratorFailure& e) {
    r.outcome = Outcome::GeneratorFailed;
    r.reason = e.what();
  } catch (const BridgeError& e) {
    // Raised while opening the connection, before the first minute.
    r.outcome = Outcome::GeneratorFailed;
    r.reason = e.what();
  }
  return r;
}

template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const auto workers = std::clamp<std::size_t>(jobs < 1 ? 1 : static_cast<std::size_t>(jobs), 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << bytes;
}

struct LoadedPair {
  std::string match_id;
  Timeline reference;
  std::optional<Timeline> generated;
};

/// Loads reference and generated timelines for every manifest. Returns the
/// exit code on malformed input.
std::optional<int> load_pairs(const std::vector<fs::path>& manifests, const fs::path& gen_dir,
                              const IngestConfig& ingest, std::vector<LoadedPair>& out,
                              std::ostream& log) {
  for (const auto& path : manifests) {
    try {
      const auto m = load_manifest(path);
      LoadedPair p;
      p.match_id = m.match_id;
      p.reference = load_reference(m, ingest);
      const auto gen_path = gen_dir / timeline_file_name(m.match_id);
      if (fs::exists(gen_path)) p.generated = read_timeline_file(gen_path);
      out.push_back(std::move(p));
    } catch (const IngestError& e) {
      log << "error: " << path.string() << ": " << e.what() << '\n';
      return kExitMalformed;
    }
  }
  std::sort(out.begin(), out.end(),
            [](const LoadedPair& a, const LoadedPair& b) { return a.match_id < b.match_id; });
  return std::nullopt;
}

}  // namespace

std::string to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::Echo: return "echo";
    case GeneratorKind::Oracle: return "oracle";
    case GeneratorKind::Bridge: return "bridge";
  }
  return "echo";
}

std::string to_string(GateKind k) {
  switch (k) {
    case GateKind::Reference: return "reference";
    case GateKind::Burst: return "burst";
    case GateKind::Bridge: return "bridge";
  }
  return "reference";
}

std::optional<GeneratorKind> parse_generator_kind(std::string_view s) {
  if (s == "echo") return GeneratorKind::Echo;
  if (s == "oracle") return GeneratorKind::Oracle;
  if (s == "bridge") return GeneratorKind::Bridge;
  return std::nullopt;
}

std::optional<GateKind> parse_gate_kind(std::string_view s) {
  if (s == "reference") return GateKind::Reference;
  if (s == "burst") return GateKind::Burst;
  if (s == "bridge") return GateKind::Bridge;
  return std::nullopt;
}

std::vector<fs::path> dataset_manifests(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw std::invalid_argument("cannot open manifest " + manifest.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(manifest.string() + ": " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument(manifest.string() + ": expected an object");
  if (!j.contains("datasets")) return {manifest};
  std::vector<fs::path> out;
  const auto base = manifest.parent_path();
  for (const auto& entry : j.at("datasets")) {
    if (!entry.is_string()) throw std::invalid_argument("datasets entries must be paths");
    out.push_back(base / entry.get<std::string>());
  }
  return out;
}

RunOptions load_run_options(const fs::path& manifest) {
  RunOptions opts;
  opts.datasets = dataset_manifests(manifest);

  std::ifstream in(manifest);
  const json j = json::parse(in);
  if (!j.contains("datasets")) return opts;  // a bare match manifest

  reject_unknown_keys(j, "run manifest",
                      {"datasets", "ingest", "pipeline", "generator", "tokenizer", "out", "seed", "jobs"});
  const auto base = manifest.parent_path();

  if (j.contains("ingest")) {
    const auto& s = j.at("ingest");
    reject_unknown_keys(s, "ingest", {"min_tweets", "window_before", "window_after",
                                      "exclusion_patterns", "hashtag_strip", "url_strip"});
    read_field(s, "min_tweets", opts.ingest.min_tweets);
    read_field(s, "window_before", opts.ingest.window_before_minutes);
    read_field(s, "window_after", opts.ingest.window_after_minutes);
    read_field(s, "exclusion_patterns", opts.ingest.exclusion_patterns);
    read_field(s, "hashtag_strip", opts.ingest.hashtag_strip);
    read_field(s, "url_strip", opts.ingest.url_strip);
  }
  if (j.contains("pipeline")) {
    const auto& s = j.at("pipeline");
    reject_unknown_keys(s, "pipeline", {"variant", "lookahead", "lookback", "context_source"});
    read_enum(s, "variant", parse_variant, opts.pipeline.variant);
    read_field(s, "lookahead", opts.pipeline.tweet_lookahead_minutes);
    read_field(s, "lookback", opts.pipeline.context_lookback_minutes);
    read_enum(s, "context_source", parse_context_source, opts.pipeline.context_source);
  }
  if (j.contains("generator")) {
    const auto& s = j.at("generator");
    reject_unknown_keys(s, "generator", {"kind", "gate", "bridge_cmd", "bridge_addr", "timeout_ms",
                                         "max_tweets", "burst", "oracle_denominator"});
    auto& g = opts.generator;
    read_enum(s, "kind", parse_generator_kind, g.kind);
    if (s.contains("gate")) {
      GateKind gate{};
      read_enum(s, "gate", parse_gate_kind, gate);
      g.gate = gate;
    }
    if (s.contains("bridge_cmd")) {
      g.bridge.transport = BridgeTransport::Subprocess;
      read_field(s, "bridge_cmd", g.bridge.endpoint);
    }
    if (s.contains("bridge_addr")) {
      g.bridge.transport = BridgeTransport::Tcp;
      read_field(s, "bridge_addr", g.bridge.endpoint);
    }
    read_field(s, "timeout_ms", g.bridge.timeout_ms);
    read_field(s, "max_tweets", g.bridge.max_tweets_per_request);
    if (s.contains("burst")) {
      const auto& b = s.at("burst");
      reject_unknown_keys(b, "generator.burst", {"trailing_minutes", "ratio_threshold", "min_count"});
      read_field(b, "trailing_minutes", g.burst.trailing_minutes);
      read_field(b, "ratio_threshold", g.burst.ratio_threshold);
      read_field(b, "min_count", g.burst.min_count);
    }
    read_enum(s, "oracle_denominator", parse_oracle_denominator, g.oracle.denominator);
  }
  if (j.contains("tokenizer")) {
    const auto& s = j.at("tokenizer");
    reject_unknown_keys(s, "tokenizer", {"mode", "n", "lowercase"});
    read_enum(s, "mode", parse_tokenizer_mode, opts.tokenizer.mode);
    read_field(s, "n", opts.tokenizer.ngram_n);
    read_field(s, "lowercase", opts.tokenizer.lowercase);
  }
  if (j.contains("out")) {
    std::string out;
    read_field(j, "out", out);
    opts.out_dir = base / out;
  }
  read_field(j, "seed", opts.seed);
  read_field(j, "jobs", opts.jobs);
  return opts;
}

json canonical_config(const RunOptions& o) {
  json datasets = json::array();
  for (const auto& d : o.datasets) datasets.push_back(d.lexically_normal().generic_string());
  const auto& g = o.generator;
  json generator{{"kind", to_string(g.kind)},
                 {"gate", uses_gate(o.pipeline.variant)
                              ? json(to_string(g.gate.value_or(default_gate(g.kind))))
                              : json(nullptr)},
                 {"oracle_denominator", to_string(g.oracle.denominator)},
                 {"burst",
                  {{"trailing_minutes", g.burst.trailing_minutes},
                   {"ratio_threshold", g.burst.ratio_threshold},
                   {"min_count", g.burst.min_count}}}};
  const bool uses_bridge = g.kind == GeneratorKind::Bridge ||
                           (uses_gate(o.pipeline.variant) && g.gate == GateKind::Bridge);
  if (uses_bridge) {
    generator["bridge"] = {{"transport", g.bridge.transport == BridgeTransport::Tcp ? "tcp" : "subprocess"},
                           {"endpoint", g.bridge.endpoint},
                           {"timeout_ms", g.bridge.timeout_ms},
                           {"max_tweets", g.bridge.max_tweets_per_request}};
  }
  return json{{"datasets", std::move(datasets)},
              {"ingest",
               {{"min_tweets", o.ingest.min_tweets},
                {"window_before", o.ingest.window_before_minutes},
                {"window_after", o.ingest.window_after_minutes},
                {"exclusion_patterns", o.ingest.exclusion_patterns},
                {"hashtag_strip", o.ingest.hashtag_strip},
                {"url_strip", o.ingest.url_strip}}},
              {"pipeline",
               {{"variant", to_string(o.pipeline.variant)},
                {"lookahead", o.pipeline.tweet_lookahead_minutes},
                {"lookback", o.pipeline.context_lookback_minutes},
                {"context_source", to_string(o.pipeline.context_source)}}},
              {"generator", std::move(generator)},
              {"tokenizer",
               {{"mode", to_string(o.tokenizer.mode)},
                {"n", o.tokenizer.ngram_n},
                {"lowercase", o.tokenizer.lowercase}}},
              {"seed", o.seed}};
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::string hex;
  for (unsigned int k = 0; k < len; ++k) hex += fmt::format("{:02x}", digest[k]);
  return hex;
}

int cmd_ingest(const std::vector<fs::path>& manifests, const IngestConfig& cfg, std::ostream& out,
               std::ostream& log) {
  json rows = json::array();
  int code = kExitOk;
  for (const auto& path : manifests) {
    json row{{"manifest", path.generic_string()}};
    try {
      const auto m = load_manifest(path);
      row["match_id"] = m.match_id;
      const auto d = load_match(m, cfg);
      const auto violations = validate_dataset(d, cfg.window_before_minutes, cfg.window_after_minutes);
      row["status"] = violations.empty() ? "accepted" : "invalid";
      row["tweets"] = d.tweets.size();
      row["reference_minutes"] = d.reference.size();
      row["reference_updates"] = d.reference.present_count();
      row["span"] = {d.reference.start_minute, d.reference.end_minute()};
      if (!violations.empty()) {
        json v = json::array();
        for (const auto& x : violations) v.push_back({{"field", x.field}, {"record", x.record}, {"message", x.message}});
        row["violations"] = std::move(v);
        code = kExitMalformed;
      }
      log << fmt::format("{}: {} tweets, {} reference updates, {}\n", m.match_id, d.tweets.size(),
                         d.reference.present_count(), row["status"].get<std::string>());
    } catch (const IngestError& e) {
      if (e.kind() == IngestError::Kind::Volume) {
        row["status"] = "rejected";
        row["reason"] = "VOLUME";
        row["tweets"] = e.surviving();
      } else {
        row["status"] = "malformed";
        row["reason"] = "MALFORMED_RECORD";
        row["line"] = e.line();
        code = kExitMalformed;
      }
      row["detail"] = e.what();
      log << path.string() << ": " << row["status"].get<std::string>() << ": " << e.what() << '\n';
    }
    rows.push_back(std::move(row));
  }
  out << dump(json{{"matches", std::move(rows)}}) << '\n';
  return code;
}

int cmd_run(const RunOptions& opts, std::ostream& log) {
  opts.ingest.validate();
  opts.pipeline.validate();
  opts.tokenizer.validate();
  const bool gated = uses_gate(opts.pipeline.variant);
  if (opts.generator.gate && !gated) {
    throw std::invalid_argument("a gate was requested but variant " +
                                to_string(opts.pipeline.variant) + " is ungated");
  }
  if (gated && opts.generator.gate == GateKind::Burst) opts.generator.burst.validate();

  std::vector<MatchRun> runs(opts.datasets.size());
  parallel_for(opts.datasets.size(), opts.jobs,
               [&](std::size_t k) { runs[k] = run_one(opts.datasets[k], opts); });
  std::sort(runs.begin(), runs.end(), [](const MatchRun& a, const MatchRun& b) {
    return std::tie(a.match_id, a.manifest) < std::tie(b.match_id, b.manifest);
  });

  fs::create_directories(opts.out_dir);
  const auto provenance_path = opts.out_dir / "provenance.json";
  auto remove_outputs = [&] {
    std::error_code ec;
    for (const auto& r : runs) {
      if (!r.match_id.empty()) fs::remove(opts.out_dir / timeline_file_name(r.match_id), ec);
    }
    fs::remove(provenance_path, ec);
  };

  std::set<std::string> ids;
  for (const auto& r : runs) {
    if (!r.match_id.empty() && !ids.insert(r.match_id).second) {
      log << "error: duplicate match_id " << r.match_id << '\n';
      remove_outputs();
      return kExitMalformed;
    }
  }
  for (const auto& r : runs) {
    if (r.outcome == Outcome::Malformed) {
      log << "error: " << r.manifest.string() << ": " << r.reason << '\n';
      remove_outputs();
      return kExitMalformed;
    }
  }
  for (const auto& r : runs) {
    if (r.outcome == Outcome::GeneratorFailed) {
      log << "error: " << r.match_id << ": " << r.reason << '\n';
      remove_outputs();
      return kExitGeneratorFailure;
    }
  }

  const auto config = canonical_config(opts);
  json matches = json::array();
  for (const auto& r : runs) {
    json row{{"match_id", r.match_id}, {"tweets", r.tweets}};
    if (r.outcome == Outcome::Rejected) {
      row["status"] = "rejected";
      row["reason"] = "VOLUME";
      log << r.match_id << ": rejected (" << r.reason << ")\n";
    } else {
      const auto file = timeline_file_name(r.match_id);
      std::ostringstream body;
      write_timeline(body, r.timeline);
      write_file(opts.out_dir / file, body.str());
      row["status"] = "generated";
      row["timeline"] = file;
      row["minutes"] = r.timeline.size();
      row["present_updates"] = r.timeline.present_count();
      row["timeline_sha256"] = sha256_hex(body.str());
      log << fmt::format("{}: {} updates over {} minutes\n", r.match_id, r.timeline.present_count(),
                         r.timeline.size());
    }
    matches.push_back(std::move(row));
  }
  const json provenance{{"tool", "livetl"},
                        {"version", kToolVersion},
                        {"config_hash", sha256_hex(config.dump())},
                        {"config", config},
                        {"generator", to_string(opts.generator.kind)},
                        {"matches", std::move(matches)}};
  write_file(provenance_path, dump(provenance) + "\n");
  return kExitOk;
}

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& log) {
  opts.tokenizer.validate();
  std::vector<LoadedPair> pairs;
  if (auto code = load_pairs(opts.manifests, opts.gen_dir, opts.ingest, pairs, log)) return *code;

  std::vector<MatchEvaluation> evals;
  json skipped = json::array();
  for (const auto& p : pairs) {
    if (!p.generated) {
      skipped.push_back(p.match_id);
      log << p.match_id << ": no generated timeline, skipped\n";
      continue;
    }
    try {
      evals.push_back(evaluate_match(p.match_id, *p.generated, p.reference, opts.tokenizer));
    } catch (const SpanMismatch& e) {
      log << "error: " << p.match_id << ": " << e.what() << '\n';
      return kExitSpanMismatch;
    }
  }
  const auto corpus = aggregate(std::move(evals), opts.tokenizer.ngram_n);
  auto report = to_json(corpus);
  report["tokenizer"] = to_string(opts.tokenizer.mode);
  report["skipped"] = std::move(skipped);
  if (opts.report) {
    if (opts.report->has_parent_path()) fs::create_directories(opts.report->parent_path());
    write_file(*opts.report, dump(report) + "\n");
    out << format_table(corpus);
  } else {
    out << dump(report) << '\n';
  }
  return kExitOk;
}

const json& default_patterns() {
  static const json patterns = json::parse(R"PAT({
    "goal": [
      "GOAL!*\\s+(?<scorer>[A-Z][\\w'-]*)\\s+scores",
      "(?i)goal\\s+(?:by|for)\\s+(?<scorer>[A-Z][\\w'-]*)"
    ],
    "substitution": [
      "(?<player_out>[A-Z][\\w'-]*)\\s+OUT\\s*(?:→|->)\\s*\\d*\\s*(?<player_in>[A-Z][\\w'-]*)\\s+IN",
      "(?i)substitution\\W+(?<player_in>[A-Z][\\w'-]*)\\s+(?:comes on\\s+)?(?:for|replaces)\\s+(?<player_out>[A-Z][\\w'-]*)"
    ],
    "card": [
      "(?i)(?<card_type>yellow|red)\\s+card\\s+(?:for|to)\\s+(?<player>[A-Z][\\w'-]*)",
      "(?<player>[A-Z][\\w'-]*)\\s+(?:is\\s+)?(?:booked|cautioned)"
    ]
  })PAT");
  return patterns;
}

int cmd_events(const EventsOptions& opts, std::ostream& out, std::ostream& log) {
  const auto patterns = opts.patterns ? EventPatternSet::load(*opts.patterns)
                                      : EventPatternSet::from_json(default_patterns());
  std::vector<LoadedPair> pairs;
  if (auto code = load_pairs(opts.manifests, opts.gen_dir, opts.ingest, pairs, log)) return *code;

  std::vector<MatchMode> modes;
  if (opts.mode) modes.push_back(*opts.mode);
  else modes = {MatchMode::Lenient, MatchMode::Strict};

  std::map<MatchMode, EventScores> totals;
  for (auto mode : modes) totals[mode].mode = mode;
  json per_match = json::array();
  json skipped = json::array();
  for (const auto& p : pairs) {
    if (!p.generated) {
      skipped.push_back(p.match_id);
      continue;
    }
    const auto& gen = *p.generated;
    const bool same_span = gen.size() == p.reference.size() &&
                           (gen.empty() || gen.start_minute == p.reference.start_minute);
    if (!same_span) {
      log << "error: " << p.match_id << ": generated span differs from reference span\n";
      return kExitSpanMismatch;
    }
    const auto ref_events = extract_events(p.reference, patterns);
    const auto gen_events = extract_events(gen, patterns);
    json row{{"match_id", p.match_id}};
    json re = json::array();
    json ge = json::array();
    for (const auto& e : ref_events) re.push_back(to_json(e));
    for (const auto& e : gen_events) ge.push_back(to_json(e));
    row["reference_events"] = std::move(re);
    row["generated_events"] = std::move(ge);
    for (auto mode : modes) {
      const auto scores = match_events(ref_events, gen_events, mode, opts.window);
      row[to_string(mode)] = to_json(scores);
      accumulate(totals[mode], scores);
    }
    per_match.push_back(std::move(row));
  }

  json report{{"window", opts.window},
              {"patterns", opts.patterns ? opts.patterns->generic_string() : std::string("builtin")},
              {"matches", std::move(per_match)},
              {"skipped", std::move(skipped)}};
  for (const auto& [mode, scores] : totals) report[to_string(mode)] = to_json(scores);

  if (opts.report) {
    if (opts.report->has_parent_path()) fs::create_directories(opts.report->parent_path());
    write_file(*opts.report, dump(report) + "\n");
    out << fmt::format("{:<14} {:<9} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}\n", "event", "mode", "ref",
                       "gen", "match", "P", "R", "F1");
    for (const auto& [mode, scores] : totals) {
      auto line = [&](const std::string& name, const EventCounts& c) {
        out << fmt::format("{:<14} {:<9} {:>7} {:>7} {:>7} {:>7.3f} {:>7.3f} {:>7.3f}\n", name,
                           to_string(mode), c.reference, c.generated, c.matched, c.scores.precision,
                           c.scores.recall, c.scores.f1);
      };
      for (const auto& [kind, c] : scores.per_kind) line(to_string(kind), c);
      line("total", scores.total);
    }
  } else {
    out << dump(report) << '\n';
  }
  return kExitOk;
}

void init_logging() {
  auto logger = spdlog::get("livetl");
  if (!logger) {
    logger = spdlog::stderr_color_mt("livetl");
    spdlog::set_default_logger(logger);
  }
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("LIVETL_LOG"); env != nullptr && *env != '\0') {
    level = spdlog::level::from_str(env);
  }
  spdlog::set_level(level);
}

}  // namespace livetl::app
