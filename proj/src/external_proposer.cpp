#include "btground/external_proposer.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstring>
#include <mutex>

#define CPPHTTPLIB_NO_EXCEPTIONS 0
#include <httplib.h>

#include "btground/wire.hpp"

namespace btground {

ExternalSpec parse_external_spec(const std::string& spec) {
  const std::string prefix = "external:";
  std::string body = spec;
  if (body.rfind(prefix, 0) == 0) body = body.substr(prefix.size());
  if (body.rfind("cmd=", 0) == 0) {
    return {ExternalSpec::Kind::Command, body.substr(4)};
  }
  if (body.rfind("url=", 0) == 0) {
    return {ExternalSpec::Kind::Url, body.substr(4)};
  }
  throw DomainError("bad external proposer spec '" + spec +
                    "' (expected external:cmd=<path> or external:url=<endpoint>)");
}

namespace {

/// Long-lived subprocess with line-based stdin/stdout. Respawned if the
/// adapter exits between calls.
class AdapterProcess {
 public:
  explicit AdapterProcess(std::string command) : command_(std::move(command)) {}

  ~AdapterProcess() { shutdown(); }

  std::string roundtrip(const std::string& line, int timeout_ms) {
    std::lock_guard<std::mutex> lock(mutex_);
    ensure_running();

    std::string payload = line + "\n";
    std::size_t written = 0;
    while (written < payload.size()) {
      ssize_t n = ::write(to_child_, payload.data() + written, payload.size() - written);
      if (n <= 0) {
        shutdown_locked();
        throw ProtocolError("adapter process closed its input");
      }
      written += static_cast<std::size_t>(n);
    }

    std::string response;
    while (true) {
      auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        response = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return response;
      }
      struct pollfd pfd{from_child_, POLLIN, 0};
      int rc = ::poll(&pfd, 1, timeout_ms);
      if (rc == 0) {
        shutdown_locked();
        throw ProtocolError("adapter response timed out");
      }
      if (rc < 0) {
        shutdown_locked();
        throw ProtocolError("adapter poll failed");
      }
      char chunk[4096];
      ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
      if (n <= 0) {
        shutdown_locked();
        throw ProtocolError("adapter process exited before responding");
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  void ensure_running() {
    if (pid_ > 0) {
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) == pid_) pid_ = -1;
    }
    if (pid_ > 0) return;

    int in_pipe[2];
    int out_pipe[2];
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) {
      throw ProtocolError("failed to create adapter pipes");
    }
    pid_t pid = ::fork();
    if (pid < 0) throw ProtocolError("failed to fork adapter process");
    if (pid == 0) {
      ::dup2(in_pipe[0], STDIN_FILENO);
      ::dup2(out_pipe[1], STDOUT_FILENO);
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      ::close(out_pipe[0]);
      ::close(out_pipe[1]);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), (char*)nullptr);
      _exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    pid_ = pid;
    buffer_.clear();
  }

  void shutdown_locked() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    to_child_ = from_child_ = -1;
    if (pid_ > 0) {
      ::kill(pid_, SIGTERM);
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
  }

  void shutdown() {
    std::lock_guard<std::mutex> lock(mutex_);
    shutdown_locked();
  }

  std::string command_;
  std::mutex mutex_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

std::string http_roundtrip(const std::string& url, const std::string& line,
                           int timeout_ms) {
  // Split http://host:port/path
  std::string rest = url;
  auto scheme = rest.find("://");
  if (scheme != std::string::npos) rest = rest.substr(scheme + 3);
  std::string host = rest;
  std::string path = "/";
  auto slash = rest.find('/');
  if (slash != std::string::npos) {
    host = rest.substr(0, slash);
    path = rest.substr(slash);
  }
  httplib::Client client(("http://" + host).c_str());
  client.set_connection_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
  client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
  auto res = client.Post(path.c_str(), line, "application/json");
  if (!res) throw ProtocolError("adapter endpoint unreachable: " + url);
  if (res->status != 200) {
    throw ProtocolError("adapter endpoint returned status " + std::to_string(res->status));
  }
  std::string body = res->body;
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
  return body;
}

class ExternalEndpoint {
 public:
  ExternalEndpoint(ExternalSpec spec, int timeout_ms)
      : spec_(std::move(spec)), timeout_ms_(timeout_ms) {
    if (spec_.kind == ExternalSpec::Kind::Command) {
      process_ = std::make_unique<AdapterProcess>(spec_.value);
    }
  }

  WireResponse call(const ProposerRequest& request) {
    const std::string line = serialize_request(request);
    std::string reply;
    if (spec_.kind == ExternalSpec::Kind::Command) {
      reply = process_->roundtrip(line, timeout_ms_);
    } else {
      reply = http_roundtrip(spec_.value, line, timeout_ms_);
    }
    return parse_response(reply, request.phase, *request.universe);
  }

 private:
  ExternalSpec spec_;
  int timeout_ms_;
  std::unique_ptr<AdapterProcess> process_;
};

class ExternalModelProposer : public ModelProposer {
 public:
  explicit ExternalModelProposer(std::shared_ptr<ExternalEndpoint> ep) : ep_(std::move(ep)) {}
  std::vector<ActionModel> propose(const ProposerRequest& req) override {
    return ep_->call(req).models;
  }

 private:
  std::shared_ptr<ExternalEndpoint> ep_;
};

class ExternalPolicySampler : public PolicySampler {
 public:
  explicit ExternalPolicySampler(std::shared_ptr<ExternalEndpoint> ep) : ep_(std::move(ep)) {}
  PolicyChoice sample(const ProposerRequest& req) override {
    auto response = ep_->call(req);
    if (!response.policy) throw ProtocolError("policy_sample response lacked a policy");
    return *response.policy;
  }

 private:
  std::shared_ptr<ExternalEndpoint> ep_;
};

class ExternalModelRefiner : public ModelRefiner {
 public:
  explicit ExternalModelRefiner(std::shared_ptr<ExternalEndpoint> ep) : ep_(std::move(ep)) {}
  RefineOutcome refine(const ProposerRequest& req) override {
    return ep_->call(req).refinement;
  }

 private:
  std::shared_ptr<ExternalEndpoint> ep_;
};

}  // namespace

ProposerBundle make_external_proposer(const std::string& spec, int timeout_ms) {
  auto endpoint = std::make_shared<ExternalEndpoint>(parse_external_spec(spec), timeout_ms);
  return {std::make_shared<ExternalModelProposer>(endpoint),
          std::make_shared<ExternalPolicySampler>(endpoint),
          std::make_shared<ExternalModelRefiner>(endpoint), "external"};
}

}  // namespace btground
