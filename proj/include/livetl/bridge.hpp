#pragma once

// Client side of the external generator/classifier protocol.
//
// Newline-delimited JSON, UTF-8, one frame per line, one request in flight:
//
//   -> {"v":1,"kind":"generate"|"classify","minute":int,
//       "tweets":[string],"context":[{"minute":int,"text":string}]}
//   <- {"v":1,"update":string|null}        (generate)
//   <- {"v":1,"decision":"yes"|"no"}       (classify)
//
// A peer may also answer {"v":1,"error":"..."}; the client reports that as a
// protocol error. Two transports: a child process spoken to over its
// stdin/stdout, or a TCP connection.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "livetl/pipeline.hpp"

namespace livetl {

enum class BridgeTransport { Subprocess, Tcp };

struct BridgeConfig {
  BridgeTransport transport = BridgeTransport::Subprocess;
  /// Shell command line (Subprocess) or "host:port" (Tcp).
  std::string endpoint;
  int timeout_ms = 30'000;
  /// Longer windows keep their first (oldest) tweets.
  std::size_t max_tweets_per_request = 256;

  void validate() const;
};

class BridgeError : public std::runtime_error {
 public:
  enum class Kind { Timeout, Protocol, Exit };

  BridgeError(Kind kind, const std::string& what, int exit_code = 0)
      : std::runtime_error(what), kind_(kind), exit_code_(exit_code) {}

  Kind kind() const { return kind_; }
  /// Child exit status (Exit only); -1 when a TCP peer hung up.
  int exit_code() const { return exit_code_; }

 private:
  Kind kind_;
  int exit_code_;
};

enum class RequestKind { Generate, Classify };

nlohmann::json encode_request(RequestKind kind, const GenerationRequest& req,
                              std::size_t max_tweets);

/// Parsers for one response line. Throw BridgeError(Protocol).
std::optional<std::string> decode_generate_response(const std::string& line);
Decision decode_classify_response(const std::string& line);

/// Line-oriented duplex byte channel with a per-call deadline.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void write_line(const std::string& line, int timeout_ms) = 0;
  virtual std::string read_line(int timeout_ms) = 0;
};

std::unique_ptr<LineChannel> open_channel(const BridgeConfig& cfg);

/// One connection, lockstep request/response. After any error the client
/// is unusable and every later call throws.
class BridgeClient {
 public:
  explicit BridgeClient(BridgeConfig cfg);
  BridgeClient(BridgeConfig cfg, std::unique_ptr<LineChannel> channel);

  std::optional<std::string> generate(const GenerationRequest& req);
  Decision classify(const GenerationRequest& req);

  const BridgeConfig& config() const { return cfg_; }

 private:
  std::string round_trip(RequestKind kind, const GenerationRequest& req);

  BridgeConfig cfg_;
  std::unique_ptr<LineChannel> channel_;
  bool broken_ = false;
};

/// One-shot helpers: open a connection, exchange one frame pair, close.
std::optional<std::string> bridge_generate(const GenerationRequest& req, const BridgeConfig& cfg);
Decision bridge_classify(const GenerationRequest& req, const BridgeConfig& cfg);

class BridgeGenerator final : public Generator {
 public:
  explicit BridgeGenerator(std::shared_ptr<BridgeClient> client) : client_(std::move(client)) {}
  std::optional<std::string> generate(const GenerationRequest& req) override {
    return client_->generate(req);
  }

 private:
  std::shared_ptr<BridgeClient> client_;
};

class BridgeGate final : public Gate {
 public:
  explicit BridgeGate(std::shared_ptr<BridgeClient> client) : client_(std::move(client)) {}
  Decision decide(const GenerationRequest& req) override { return client_->classify(req); }

 private:
  std::shared_ptr<BridgeClient> client_;
};

}  // namespace livetl
