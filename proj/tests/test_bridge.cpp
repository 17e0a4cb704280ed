#include <doctest.h>

#include <signal.h>

#include <chrono>
#include <cstdio>
#include <random>

#include "livetl/bridge.hpp"
#include "livetl/generators.hpp"
#include "support.hpp"

using namespace livetl;
using testsupport::tweet;

namespace {

BridgeConfig stdio(const std::string& mode, int timeout_ms = 5000) {
  BridgeConfig cfg;
  cfg.transport = BridgeTransport::Subprocess;
  cfg.endpoint = std::string(BRIDGE_STUB_PATH) + " " + mode;
  cfg.timeout_ms = timeout_ms;
  return cfg;
}

/// Stub listening on TCP for the lifetime of the object.
class TcpStub {
 public:
  explicit TcpStub(const std::string& mode) {
    pipe_ = ::popen(("exec " + std::string(BRIDGE_STUB_PATH) + " " + mode + " --tcp").c_str(), "r");
    REQUIRE(pipe_ != nullptr);
    REQUIRE(std::fscanf(pipe_, "%d %d", &port_, &pid_) == 2);
  }
  ~TcpStub() {
    ::kill(pid_, SIGKILL);
    ::pclose(pipe_);
  }
  BridgeConfig config(int timeout_ms = 5000) const {
    BridgeConfig cfg;
    cfg.transport = BridgeTransport::Tcp;
    cfg.endpoint = "127.0.0.1:" + std::to_string(port_);
    cfg.timeout_ms = timeout_ms;
    return cfg;
  }

 private:
  FILE* pipe_ = nullptr;
  int port_ = 0;
  int pid_ = 0;
};

GenerationRequest request(std::vector<std::string> texts, Minute minute = 4) {
  GenerationRequest req;
  req.minute = minute;
  for (std::size_t k = 0; k < texts.size(); ++k) req.tweets.push_back(tweet(std::to_string(k), minute, texts[k]));
  req.context = {{minute - 1, "before"}};
  return req;
}

BridgeError::Kind failure_kind(const BridgeConfig& cfg, RequestKind kind = RequestKind::Generate) {
  try {
    if (kind == RequestKind::Generate) bridge_generate(request({"x"}), cfg);
    else bridge_classify(request({"x"}), cfg);
  } catch (const BridgeError& e) {
    return e.kind();
  }
  FAIL("expected a BridgeError");
  return BridgeError::Kind::Protocol;
}

}  // namespace

TEST_SUITE("bridge") {

TEST_CASE("request encoding") {
  auto req = request({"a", "b", "c"});
  const auto j = encode_request(RequestKind::Generate, req, 2);
  CHECK(j == nlohmann::json::parse(
                 R"({"v":1,"kind":"generate","minute":4,"tweets":["a","b"],"context":[{"minute":3,"text":"before"}]})"));
  CHECK(encode_request(RequestKind::Classify, req, 256)["kind"] == "classify");
}

TEST_CASE("response decoding") {
  CHECK(decode_generate_response(R"({"v":1,"update":"  hi  "})") == "hi");
  CHECK_FALSE(decode_generate_response(R"({"v":1,"update":null})"));
  CHECK_FALSE(decode_generate_response(R"({"v":1,"update":"   "})"));
  CHECK(decode_classify_response(R"({"v":1,"decision":"yes"})") == Decision::Yes);
  CHECK(decode_classify_response(R"({"v":1,"decision":"no"})") == Decision::No);
  for (const char* bad : {R"({"v":1,"decision":"maybe"})", R"({"v":2,"decision":"yes"})", "nope",
                          R"({"v":1,"error":"x"})", R"([1])"}) {
    CHECK_THROWS_AS(decode_classify_response(bad), BridgeError);
  }
  CHECK_THROWS_AS(decode_generate_response(R"({"v":1})"), BridgeError);
  CHECK_THROWS_AS(decode_generate_response(R"({"v":1,"update":3})"), BridgeError);
}

TEST_CASE("subprocess peer") {
  CHECK(bridge_generate(request({"first", "second"}), stdio("echo")) == "first");
  CHECK_FALSE(bridge_generate(request({}), stdio("echo")));
  CHECK_FALSE(bridge_generate(request({"x"}), stdio("null")));
  CHECK(bridge_generate(request({"x", "y"}), stdio("template")) == "minute 4: 2 tweets, 1 context");
  CHECK(bridge_classify(request({"x"}), stdio("yes")) == Decision::Yes);
  CHECK(bridge_classify(request({"x"}), stdio("no")) == Decision::No);
}

TEST_CASE("subprocess faults") {
  const auto start = std::chrono::steady_clock::now();
  CHECK(failure_kind(stdio("sleep", 200)) == BridgeError::Kind::Timeout);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(3));
  CHECK(failure_kind(stdio("maybe"), RequestKind::Classify) == BridgeError::Kind::Protocol);
  CHECK(failure_kind(stdio("malformed")) == BridgeError::Kind::Protocol);
  CHECK(failure_kind(stdio("badversion")) == BridgeError::Kind::Protocol);
  CHECK(failure_kind(stdio("error")) == BridgeError::Kind::Protocol);
  try {
    bridge_generate(request({"x"}), stdio("exit"));
    FAIL("expected exit");
  } catch (const BridgeError& e) {
    CHECK(e.kind() == BridgeError::Kind::Exit);
    CHECK(e.exit_code() == 7);
  }
  auto missing = stdio("echo");
  missing.endpoint = "/nonexistent/bridge-peer";
  CHECK(failure_kind(missing) == BridgeError::Kind::Exit);
}

TEST_CASE("client is unusable after an error") {
  BridgeClient client(stdio("malformed"));
  CHECK_THROWS_AS(client.generate(request({"x"})), BridgeError);
  CHECK_THROWS_AS(client.generate(request({"x"})), BridgeError);
}

TEST_CASE("tcp peer") {
  TcpStub echo("echo");
  CHECK(bridge_generate(request({"first"}), echo.config()) == "first");
  BridgeClient client(echo.config());
  for (int k = 0; k < 20; ++k) CHECK(client.generate(request({"m" + std::to_string(k)})) == "m" + std::to_string(k));
  CHECK(client.classify(request({})) == Decision::Yes);

  TcpStub slow("sleep");
  CHECK(failure_kind(slow.config(200)) == BridgeError::Kind::Timeout);
  TcpStub bad("malformed");
  CHECK(failure_kind(bad.config()) == BridgeError::Kind::Protocol);
  TcpStub dying("exit");
  CHECK(failure_kind(dying.config()) == BridgeError::Kind::Exit);

  BridgeConfig refused;
  refused.transport = BridgeTransport::Tcp;
  refused.endpoint = "127.0.0.1:1";
  CHECK(failure_kind(refused) == BridgeError::Kind::Protocol);
  refused.endpoint = "no-port";
  CHECK_THROWS_AS(bridge_generate(request({}), refused), std::invalid_argument);
}

TEST_CASE("loopback equals in-process echo") {
  std::mt19937_64 rng(41);
  TcpStub tcp("echo");
  for (int k = 0; k < 5; ++k) {
    const auto d = testsupport::random_dataset(rng, 30, 4);
    EchoGenerator echo;
    const auto expected = run_match(d, {}, echo);
    for (const auto& cfg : {stdio("echo"), tcp.config()}) {
      BridgeGenerator gen(std::make_shared<BridgeClient>(cfg));
      CHECK(run_match(d, {}, gen) == expected);
    }
  }
}

TEST_CASE("bridge failures become GeneratorFailure in the pipeline") {
  std::mt19937_64 rng(43);
  const auto d = testsupport::random_dataset(rng, 10, 2);
  BridgeGenerator gen(std::make_shared<BridgeClient>(stdio("malformed")));
  CHECK_THROWS_AS(run_match(d, {}, gen), GeneratorFailure);
  PipelineConfig cfg;
  cfg.variant = Variant::Clf;
  BridgeGenerator echo(std::make_shared<BridgeClient>(stdio("echo")));
  BridgeGate maybe(std::make_shared<BridgeClient>(stdio("maybe")));
  CHECK_THROWS_AS(run_match(d, cfg, echo, &maybe), GeneratorFailure);
}

}
