#include "livetl/bridge.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <mutex>
#include <thread>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "livetl/text.hpp"

namespace livetl {

using nlohmann::json;

namespace {

constexpr int kProtocolVersion = 1;

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline) {
  const auto left =
      std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left > 0 ? static_cast<int>(left) : 0;
}

BridgeError timeout_error(int timeout_ms) {
  return BridgeError(BridgeError::Kind::Timeout,
                     "bridge peer did not answer within " + std::to_string(timeout_ms) + " ms");
}

/// Buffered line I/O over a readable and a writable file descriptor.
class FdChannel : public LineChannel {
 public:
  void write_line(const std::string& line, int timeout_ms) override {
    std::string frame = line;
    frame.push_back('\n');
    const auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
    std::size_t sent = 0;
    while (sent < frame.size()) {
      pollfd p{write_fd(), POLLOUT, 0};
      const int r = ::poll(&p, 1, remaining_ms(deadline));
      if (r < 0 && errno == EINTR) continue;
      if (r == 0) throw timeout_error(timeout_ms);
      const ssize_t n = do_write(frame.data() + sent, frame.size() - sent);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        if (errno == EPIPE || errno == ECONNRESET) on_hangup();
        throw BridgeError(BridgeError::Kind::Protocol,
                          std::string("bridge write failed: ") + std::strerror(errno));
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(int timeout_ms) override {
    const auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      pollfd p{read_fd(), POLLIN, 0};
      const int r = ::poll(&p, 1, remaining_ms(deadline));
      if (r < 0 && errno == EINTR) continue;
      if (r == 0) throw timeout_error(timeout_ms);
      char chunk[4096];
      const ssize_t n = ::read(read_fd(), chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        if (errno == ECONNRESET) on_hangup();
        throw BridgeError(BridgeError::Kind::Protocol,
                          std::string("bridge read failed: ") + std::strerror(errno));
      }
      if (n == 0) on_hangup();
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 protected:
  virtual int read_fd() const = 0;
  virtual int write_fd() const = 0;
  virtual ssize_t do_write(const char* data, std::size_t len) { return ::write(write_fd(), data, len); }
  /// Peer went away; must throw.
  [[noreturn]] virtual void on_hangup() = 0;

 private:
  std::string buffer_;
};

class SubprocessChannel final : public FdChannel {
 public:
  explicit SubprocessChannel(const std::string& command) {
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) throw_errno("pipe");
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw_errno("pipe");
    }
    pid_ = ::fork();
    if (pid_ < 0) {
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
      throw_errno("fork");
    }
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    stdin_fd_ = to_child[1];
    stdout_fd_ = from_child[0];
  }

  ~SubprocessChannel() override {
    if (stdin_fd_ >= 0) ::close(stdin_fd_);
    if (stdout_fd_ >= 0) ::close(stdout_fd_);
    if (pid_ > 0 && !reaped_) {
      // Give a well-behaved peer a moment to exit on EOF.
      for (int k = 0; k < 20; ++k) {
        int status = 0;
        if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
      ::kill(pid_, SIGKILL);
      int status = 0;
      ::waitpid(pid_, &status, 0);
    }
  }

  SubprocessChannel(const SubprocessChannel&) = delete;
  SubprocessChannel& operator=(const SubprocessChannel&) = delete;

 protected:
  int read_fd() const override { return stdout_fd_; }
  int write_fd() const override { return stdin_fd_; }

  [[noreturn]] void on_hangup() override {
    int status = 0;
    int code = -1;
    // The pipe closed; the child is exiting or already gone. A child that
    // closed its stdout but keeps running is killed after one second.
    for (int k = 0; k <= 100 && !reaped_; ++k) {
      if (k == 100) {
        ::kill(pid_, SIGKILL);
        reaped_ = ::waitpid(pid_, &status, 0) == pid_;
        break;
      }
      reaped_ = ::waitpid(pid_, &status, WNOHANG) == pid_;
      if (!reaped_) std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    if (reaped_) {
      if (WIFEXITED(status)) code = WEXITSTATUS(status);
      else if (WIFSIGNALED(status)) code = 128 + WTERMSIG(status);
    }
    throw BridgeError(BridgeError::Kind::Exit,
                      "bridge process exited with code " + std::to_string(code), code);
  }

 private:
  [[noreturn]] static void throw_errno(const char* what) {
    throw BridgeError(BridgeError::Kind::Protocol,
                      std::string("cannot start bridge process: ") + what + ": " + std::strerror(errno));
  }

  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  bool reaped_ = false;
};

class TcpChannel final : public FdChannel {
 public:
  explicit TcpChannel(const std::string& endpoint) {
    const auto colon = endpoint.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == endpoint.size()) {
      throw std::invalid_argument("bridge endpoint must be host:port, got '" + endpoint + "'");
    }
    std::string host = endpoint.substr(0, colon);
    if (host.size() > 2 && host.front() == '[' && host.back() == ']') {
      host = host.substr(1, host.size() - 2);
    }
    const std::string port = endpoint.substr(colon + 1);

    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &found); rc != 0) {
      throw BridgeError(BridgeError::Kind::Protocol,
                        "cannot resolve " + endpoint + ": " + ::gai_strerror(rc));
    }
    for (auto* ai = found; ai != nullptr; ai = ai->ai_next) {
      const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
        fd_ = fd;
        break;
      }
      ::close(fd);
    }
    ::freeaddrinfo(found);
    if (fd_ < 0) {
      throw BridgeError(BridgeError::Kind::Protocol, "cannot connect to bridge at " + endpoint);
    }
  }

  ~TcpChannel() override {
    if (fd_ >= 0) ::close(fd_);
  }

  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

 protected:
  int read_fd() const override { return fd_; }
  int write_fd() const override { return fd_; }
  ssize_t do_write(const char* data, std::size_t len) override {
    return ::send(fd_, data, len, MSG_NOSIGNAL);
  }
  [[noreturn]] void on_hangup() override {
    throw BridgeError(BridgeError::Kind::Exit, "bridge peer closed the connection", -1);
  }

 private:
  int fd_ = -1;
};

json parse_response(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error&) {
    throw BridgeError(BridgeError::Kind::Protocol, "response is not JSON: " + line.substr(0, 200));
  }
  if (!j.is_object()) throw BridgeError(BridgeError::Kind::Protocol, "response is not an object");
  auto v = j.find("v");
  if (v == j.end() || !v->is_number_integer() || v->get<int>() != kProtocolVersion) {
    throw BridgeError(BridgeError::Kind::Protocol, "protocol version mismatch");
  }
  if (auto err = j.find("error"); err != j.end()) {
    throw BridgeError(BridgeError::Kind::Protocol,
                      "peer error: " + (err->is_string() ? err->get<std::string>() : err->dump()));
  }
  return j;
}

}  // namespace

void BridgeConfig::validate() const {
  if (timeout_ms <= 0) throw std::invalid_argument("bridge timeout_ms must be > 0");
  if (endpoint.empty()) throw std::invalid_argument("bridge endpoint is empty");
}

json encode_request(RequestKind kind, const GenerationRequest& req, std::size_t max_tweets) {
  json tweets = json::array();
  const auto n = std::min(max_tweets, req.tweets.size());
  for (std::size_t k = 0; k < n; ++k) tweets.push_back(req.tweets[k].text);
  json context = json::array();
  for (const auto& c : req.context) context.push_back({{"minute", c.minute}, {"text", c.text}});
  return json{{"v", kProtocolVersion},
              {"kind", kind == RequestKind::Generate ? "generate" : "classify"},
              {"minute", req.minute},
              {"tweets", std::move(tweets)},
              {"context", std::move(context)}};
}

std::optional<std::string> decode_generate_response(const std::string& line) {
  const auto j = parse_response(line);
  auto u = j.find("update");
  if (u == j.end()) throw BridgeError(BridgeError::Kind::Protocol, "response lacks \"update\"");
  if (u->is_null()) return std::nullopt;
  if (!u->is_string()) {
    throw BridgeError(BridgeError::Kind::Protocol, "\"update\" must be a string or null");
  }
  auto trimmed = text::trim(u->get_ref<const std::string&>());
  if (trimmed.empty()) return std::nullopt;
  return trimmed;
}

Decision decode_classify_response(const std::string& line) {
  const auto j = parse_response(line);
  auto d = j.find("decision");
  if (d == j.end() || !d->is_string()) {
    throw BridgeError(BridgeError::Kind::Protocol, "response lacks a string \"decision\"");
  }
  const auto& s = d->get_ref<const std::string&>();
  if (s == "yes") return Decision::Yes;
  if (s == "no") return Decision::No;
  throw BridgeError(BridgeError::Kind::Protocol, "decision must be \"yes\" or \"no\", got \"" + s + "\"");
}

std::unique_ptr<LineChannel> open_channel(const BridgeConfig& cfg) {
  cfg.validate();
  ignore_sigpipe();
  if (cfg.transport == BridgeTransport::Subprocess) {
    return std::make_unique<SubprocessChannel>(cfg.endpoint);
  }
  return std::make_unique<TcpChannel>(cfg.endpoint);
}

BridgeClient::BridgeClient(BridgeConfig cfg) : cfg_(std::move(cfg)), channel_(open_channel(cfg_)) {}

BridgeClient::BridgeClient(BridgeConfig cfg, std::unique_ptr<LineChannel> channel)
    : cfg_(std::move(cfg)), channel_(std::move(channel)) {
  cfg_.validate();
}

std::string BridgeClient::round_trip(RequestKind kind, const GenerationRequest& req) {
  if (broken_) {
    throw BridgeError(BridgeError::Kind::Protocol, "bridge connection unusable after an earlier error");
  }
  try {
    const auto frame = encode_request(kind, req, cfg_.max_tweets_per_request)
                           .dump(-1, ' ', false, json::error_handler_t::replace);
    channel_->write_line(frame, cfg_.timeout_ms);
    return channel_->read_line(cfg_.timeout_ms);
  } catch (...) {
    broken_ = true;
    throw;
  }
}

std::optional<std::string> BridgeClient::generate(const GenerationRequest& req) {
  const auto line = round_trip(RequestKind::Generate, req);
  try {
    return decode_generate_response(line);
  } catch (...) {
    broken_ = true;
    throw;
  }
}

Decision BridgeClient::classify(const GenerationRequest& req) {
  const auto line = round_trip(RequestKind::Classify, req);
  try {
    return decode_classify_response(line);
  } catch (...) {
    broken_ = true;
    throw;
  }
}

std::optional<std::string> bridge_generate(const GenerationRequest& req, const BridgeConfig& cfg) {
  BridgeClient client(cfg);
  return client.generate(req);
}

Decision bridge_classify(const GenerationRequest& req, const BridgeConfig& cfg) {
  BridgeClient client(cfg);
  return client.classify(req);
}

}  // namespace livetl
