#pragma once

// Batch commands behind the `livetl` executable. Each returns the process
// exit code and writes human-readable progress to `log`.
//
// Exit codes: 0 success, 1 usage/configuration error, 2 malformed input,
// 3 generator failure, 4 span mismatch.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "livetl/bridge.hpp"
#include "livetl/core.hpp"
#include "livetl/eval_align.hpp"
#include "livetl/eval_events.hpp"
#include "livetl/generators.hpp"
#include "livetl/ingest.hpp"

namespace livetl::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitMalformed = 2;
inline constexpr int kExitGeneratorFailure = 3;
inline constexpr int kExitSpanMismatch = 4;

inline constexpr const char* kToolVersion = "0.1.0";

enum class GeneratorKind { Echo, Oracle, Bridge };
enum class GateKind { Reference, Burst, Bridge };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Echo;
  std::optional<GateKind> gate;  // unset: default for the generator kind
  BridgeConfig bridge;
  BurstGateConfig burst;
  OracleConfig oracle;
};

/// Resolved inputs for `livetl run`.
struct RunOptions {
  std::vector<std::filesystem::path> datasets;  // match manifests
  IngestConfig ingest;
  PipelineConfig pipeline;
  GeneratorSpec generator;
  TokenizerConfig tokenizer;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Reads a run manifest:
///   {"datasets": [path], "ingest": {...}, "pipeline": {...},
///    "generator": {...}, "tokenizer": {...}, "out": path, "seed": int}
/// A plain match manifest is accepted too and becomes a one-dataset run.
/// Relative paths resolve against the manifest's directory. Throws
/// std::invalid_argument on bad fields.
RunOptions load_run_options(const std::filesystem::path& manifest);

/// Match manifests named by a run manifest, or the file itself when it is a
/// match manifest.
std::vector<std::filesystem::path> dataset_manifests(const std::filesystem::path& manifest);

/// Canonical JSON of everything that determines a run's output (paths of
/// the output directory excluded), and its SHA-256.
nlohmann::json canonical_config(const RunOptions& opts);
std::string sha256_hex(const std::string& bytes);

int cmd_ingest(const std::vector<std::filesystem::path>& manifests, const IngestConfig& cfg,
               std::ostream& out, std::ostream& log);

int cmd_run(const RunOptions& opts, std::ostream& log);

struct EvalOptions {
  std::vector<std::filesystem::path> manifests;
  std::filesystem::path gen_dir;
  IngestConfig ingest;
  TokenizerConfig tokenizer;
  std::optional<std::filesystem::path> report;  // JSON report; stdout table always
};

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& log);

struct EventsOptions {
  std::vector<std::filesystem::path> manifests;
  std::filesystem::path gen_dir;
  IngestConfig ingest;
  std::optional<std::filesystem::path> patterns;  // built-in set when unset
  std::optional<MatchMode> mode;                  // both modes when unset
  int window = 2;
  std::optional<std::filesystem::path> report;
};

int cmd_events(const EventsOptions& opts, std::ostream& out, std::ostream& log);

/// Built-in English event patterns (goal / substitution / card phrasing of
/// the synthetic matches and common English live-text feeds).
const nlohmann::json& default_patterns();

std::string to_string(GeneratorKind k);
std::string to_string(GateKind k);
std::optional<GeneratorKind> parse_generator_kind(std::string_view s);
std::optional<GateKind> parse_gate_kind(std::string_view s);

/// Reads LIVETL_LOG (trace, debug, info, warn, error, off; default warn).
void init_logging();

}  // namespace livetl::app
