// livetl: build, generate and score minute-level live-text timelines.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "livetl/app.hpp"
#include "livetl/synth.hpp"

namespace app = livetl::app;
namespace fs = std::filesystem;

namespace {

template <typename T, typename Parse>
CLI::Validator enum_check(Parse parse) {
  return CLI::Validator(
      [parse](std::string& s) -> std::string {
        return parse(s) ? std::string() : "unrecognised value '" + s + "'";
      },
      "");
}

struct Overrides {
  std::optional<std::int64_t> min_tweets;
  std::vector<std::string> exclude;
  std::optional<std::string> tokenizer;
  std::optional<int> ngram;

  void add_ingest(CLI::App* c) {
    c->add_option("--min-tweets", min_tweets, "keep a match only when more tweets survive");
    c->add_option("--exclude", exclude, "regex; matching reference updates become ABSENT")
        ->take_all();
  }
  void add_tokenizer(CLI::App* c) {
    c->add_option("--tokenizer", tokenizer, "char or ws")
        ->check(enum_check<livetl::TokenizerMode>(livetl::parse_tokenizer_mode));
    c->add_option("--ngram", ngram, "n-gram order for overlap scores")->check(CLI::Range(1, 16));
  }
  void apply(app::RunOptions& o) const {
    if (min_tweets) o.ingest.min_tweets = *min_tweets;
    for (const auto& e : exclude) o.ingest.exclusion_patterns.push_back(e);
    if (tokenizer) o.tokenizer.mode = *livetl::parse_tokenizer_mode(*tokenizer);
    if (ngram) o.tokenizer.ngram_n = *ngram;
  }
};

int synth_corpus(const fs::path& out, int matches, std::uint64_t seed, int minutes) {
  nlohmann::json datasets = nlohmann::json::array();
  for (int k = 0; k < matches; ++k) {
    livetl::SynthConfig cfg;
    cfg.match_id = fmt::format("synth-{:04}", k + 1);
    cfg.seed = seed + static_cast<std::uint64_t>(k);
    cfg.last_minute = minutes - 1;
    const auto d = livetl::synth_match(cfg);
    livetl::write_match_files(d, out / cfg.match_id, cfg.kickoff);
    datasets.push_back(cfg.match_id + "/manifest.json");
    std::cerr << cfg.match_id << ": " << d.tweets.size() << " tweets, "
              << d.reference.present_count() << " reference updates\n";
  }
  nlohmann::json run{{"datasets", datasets}, {"out", "generated"}, {"seed", seed}};
  std::ofstream(out / "run.json") << run.dump(2) << '\n';
  return app::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  app::init_logging();
  CLI::App cli{"Minute-level live-text timelines from tweet streams"};
  cli.set_version_flag("--version", std::string(app::kToolVersion));
  cli.require_subcommand(1);

  fs::path manifest;
  Overrides ov;

  // ingest
  auto* ingest = cli.add_subcommand("ingest", "validate archives and report what survives");
  ingest->add_option("--manifest", manifest, "run or match manifest")->required()->check(CLI::ExistingFile);
  ov.add_ingest(ingest);

  // run
  auto* run = cli.add_subcommand("run", "generate a timeline per match");
  run->add_option("--manifest", manifest, "run or match manifest")->required()->check(CLI::ExistingFile);
  ov.add_ingest(run);
  std::optional<std::string> variant, context_source, generator, gate, bridge_cmd, bridge_addr,
      out_dir, oracle_denominator;
  std::optional<int> lookahead, lookback, timeout_ms, jobs;
  std::optional<std::size_t> max_tweets;
  std::optional<std::uint64_t> seed;
  run->add_option("--variant", variant, "base, clf, cxt or clf_cxt")
      ->check(enum_check<livetl::Variant>(livetl::parse_variant));
  run->add_option("--lookahead", lookahead, "tweet window is [t, t+lookahead]");
  run->add_option("--lookback", lookback, "context window is [t-lookback, t-1]");
  run->add_option("--context-source", context_source, "generated or reference")
      ->check(enum_check<livetl::ContextSource>(livetl::parse_context_source));
  run->add_option("--generator", generator, "echo, oracle or bridge")
      ->check(enum_check<app::GeneratorKind>(app::parse_generator_kind));
  run->add_option("--gate", gate, "reference, burst or bridge (gated variants only)")
      ->check(enum_check<app::GateKind>(app::parse_gate_kind));
  auto* cmd_opt = run->add_option("--bridge-cmd", bridge_cmd, "shell command speaking the bridge protocol");
  run->add_option("--bridge-addr", bridge_addr, "host:port of a bridge server")->excludes(cmd_opt);
  run->add_option("--timeout-ms", timeout_ms, "per-request bridge deadline");
  run->add_option("--max-tweets", max_tweets, "tweets sent per bridge request");
  run->add_option("--oracle-denominator", oracle_denominator, "reference, tweet or union")
      ->check(enum_check<livetl::OracleDenominator>(livetl::parse_oracle_denominator));
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--jobs", jobs, "matches processed in parallel")->check(CLI::Range(1, 256));
  run->add_option("--seed", seed, "recorded in provenance");

  // eval
  auto* eval = cli.add_subcommand("eval", "align generated timelines with references");
  eval->add_option("--manifest", manifest, "run or match manifest")->required()->check(CLI::ExistingFile);
  fs::path gen_dir;
  std::optional<fs::path> report;
  eval->add_option("--gen", gen_dir, "directory of generated timelines")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--report", report, "write the JSON report here and print a table");
  ov.add_ingest(eval);
  ov.add_tokenizer(eval);

  // events
  auto* events = cli.add_subcommand("events", "score goal, substitution and card events");
  events->add_option("--manifest", manifest, "run or match manifest")->required()->check(CLI::ExistingFile);
  events->add_option("--gen", gen_dir, "directory of generated timelines")->required()->check(CLI::ExistingDirectory);
  events->add_option("--report", report, "write the JSON report here and print a table");
  std::optional<fs::path> patterns;
  std::optional<std::string> mode;
  int window = 2;
  events->add_option("--patterns", patterns, "JSON pattern set")->check(CLI::ExistingFile);
  events->add_option("--mode", mode, "lenient or strict (default both)")
      ->check(enum_check<livetl::MatchMode>(livetl::parse_match_mode));
  events->add_option("--window", window, "minute tolerance")->check(CLI::Range(0, 1000));
  ov.add_ingest(events);

  // synth
  auto* synth = cli.add_subcommand("synth", "write a seeded synthetic corpus");
  fs::path synth_out;
  int synth_matches = 3;
  int synth_minutes = 96;
  std::uint64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "corpus directory")->required();
  synth->add_option("--matches", synth_matches)->check(CLI::Range(1, 10000));
  synth->add_option("--minutes", synth_minutes)->check(CLI::Range(2, 10000));
  synth->add_option("--seed", synth_seed);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? app::kExitOk : app::kExitUsage;
  }

  try {
    if (*synth) return synth_corpus(synth_out, synth_matches, synth_seed, synth_minutes);

    auto opts = app::load_run_options(manifest);
    ov.apply(opts);

    if (*ingest) return app::cmd_ingest(opts.datasets, opts.ingest, std::cout, std::cerr);

    if (*run) {
      if (variant) opts.pipeline.variant = *livetl::parse_variant(*variant);
      if (lookahead) opts.pipeline.tweet_lookahead_minutes = *lookahead;
      if (lookback) opts.pipeline.context_lookback_minutes = *lookback;
      if (context_source) opts.pipeline.context_source = *livetl::parse_context_source(*context_source);
      auto& g = opts.generator;
      if (generator) g.kind = *app::parse_generator_kind(*generator);
      if (gate) g.gate = *app::parse_gate_kind(*gate);
      if (bridge_cmd) {
        g.bridge.transport = livetl::BridgeTransport::Subprocess;
        g.bridge.endpoint = *bridge_cmd;
      }
      if (bridge_addr) {
        g.bridge.transport = livetl::BridgeTransport::Tcp;
        g.bridge.endpoint = *bridge_addr;
      }
      if (timeout_ms) g.bridge.timeout_ms = *timeout_ms;
      if (max_tweets) g.bridge.max_tweets_per_request = *max_tweets;
      if (oracle_denominator) g.oracle.denominator = *livetl::parse_oracle_denominator(*oracle_denominator);
      if (out_dir) opts.out_dir = *out_dir;
      if (jobs) opts.jobs = *jobs;
      if (seed) opts.seed = *seed;
      const bool wants_bridge = g.kind == app::GeneratorKind::Bridge || g.gate == app::GateKind::Bridge;
      if (wants_bridge) g.bridge.validate();
      return app::cmd_run(opts, std::cerr);
    }

    if (*eval) {
      app::EvalOptions e{opts.datasets, gen_dir, opts.ingest, opts.tokenizer, report};
      return app::cmd_eval(e, std::cout, std::cerr);
    }

    if (*events) {
      app::EventsOptions e;
      e.manifests = opts.datasets;
      e.gen_dir = gen_dir;
      e.ingest = opts.ingest;
      e.patterns = patterns;
      if (mode) e.mode = *livetl::parse_match_mode(*mode);
      e.window = window;
      e.report = report;
      return app::cmd_events(e, std::cout, std::cerr);
    }
  } catch (const livetl::IngestError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return app::kExitMalformed;
  } catch (const livetl::SpanMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return app::kExitSpanMismatch;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return app::kExitUsage;
  }
  return app::kExitUsage;
}
