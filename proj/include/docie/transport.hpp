// Copyright 2026 The docie Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <csignal>
#include <cerrno>
#include <cstring>
#include <istream>
#include <memory>
#include <mutex>
#include <ostream>
#include <semaphore>
#include <string>
#include <string_view>
#include <utility>

#include <spawn.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "httplib.h"

#include "docie/protocol.hpp"
#include "docie/scorers.hpp"

extern char** environ;

namespace docie::transport {

// A request/response message pipe; one line in, one line out.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual std::string roundtrip(const std::string& line) = 0;
};

// Runs `/bin/sh -c command` and exchanges newline-delimited messages over its
// standard input and output. Calls are serialized.
class StdioChannel : public Channel {
 public:
  explicit StdioChannel(const std::string& command) {
    std::signal(SIGPIPE, SIG_IGN);
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0) throw protocol::TransportError("pipe: " + std::string(std::strerror(errno)));
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw protocol::TransportError("pipe: " + std::string(std::strerror(errno)));
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, to_child[1]);
    posix_spawn_file_actions_addclose(&actions, from_child[0]);
    std::string sh = "/bin/sh", dash_c = "-c", cmd = command;
    char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
    const int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, nullptr, argv, environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(to_child[0]);
    ::close(from_child[1]);
    if (rc != 0) {
      ::close(to_child[1]);
      ::close(from_child[0]);
      throw protocol::TransportError("cannot spawn '" + command + "': " + std::strerror(rc));
    }
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
  }

  StdioChannel(const StdioChannel&) = delete;
  StdioChannel& operator=(const StdioChannel&) = delete;

  ~StdioChannel() override {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    if (pid_ > 0) {
      int status = 0;
      ::waitpid(pid_, &status, 0);
    }
  }

  std::string roundtrip(const std::string& line) override {
    std::lock_guard lock(mu_);
    std::string out = line;
    out.push_back('\n');
    std::size_t written = 0;
    while (written < out.size()) {
      const ssize_t n = ::write(write_fd_, out.data() + written, out.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw protocol::TransportError("write to scorer failed: " + std::string(std::strerror(errno)));
      }
      written += static_cast<std::size_t>(n);
    }
    return read_line();
  }

 private:
  std::string read_line() {
    while (true) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      char chunk[65536];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw protocol::TransportError("read from scorer failed: " + std::string(std::strerror(errno)));
      }
      if (n == 0) throw protocol::TransportError("scorer closed its output");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  std::string buffer_;
  std::mutex mu_;
};

// One POST per message; the body is the message line.
class HttpChannel : public Channel {
 public:
  explicit HttpChannel(const std::string& url) {
    // url: http://host:port[/path]
    constexpr std::string_view scheme = "http://";
    if (!std::string_view(url).starts_with(scheme)) throw std::invalid_argument("http endpoint must start with http://");
    const std::string rest = url.substr(scheme.size());
    const auto slash = rest.find('/');
    base_ = std::string(scheme) + rest.substr(0, slash);
    path_ = slash == std::string::npos ? "/score" : rest.substr(slash);
  }

  std::string roundtrip(const std::string& line) override {
    httplib::Client client(base_);
    client.set_read_timeout(300, 0);
    auto res = client.Post(path_, line, "application/json");
    if (!res) throw protocol::TransportError("http request to " + base_ + path_ + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
      // Protocol errors come back as error messages with a 4xx status.
      if (!res->body.empty() && res->body.front() == '{') return res->body;
      throw protocol::TransportError("http status " + std::to_string(res->status) + " from " + base_ + path_);
    }
    std::string body = res->body;
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    return body;
  }

 private:
  std::string base_;
  std::string path_;
};

// Scorer behind a channel. At most `max_in_flight` requests are outstanding;
// further callers block until a slot frees.
class RemoteScorer : public Scorer {
 public:
  explicit RemoteScorer(std::unique_ptr<Channel> channel, std::ptrdiff_t max_in_flight = 1)
      : channel_(std::move(channel)), slots_(std::max<std::ptrdiff_t>(1, max_in_flight)) {}

  protocol::ScoreResponse score(const protocol::ScoreRequest& request) override {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};
    const std::string reply = channel_->roundtrip(protocol::serialize(request));
    auto response = protocol::parse_response(reply);
    protocol::check_response(request, response);
    return response;
  }

  std::string control(const std::string& line) override {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};
    return channel_->roundtrip(line);
  }

 private:
  std::unique_ptr<Channel> channel_;
  std::counting_semaphore<> slots_;
};

// ---------------------------------------------------------------------------
// Server side

// Answers one message line with one reply line. Never throws.
inline std::string handle_message(Scorer& scorer, const std::string& line) {
  std::string request_id;
  try {
    const auto j = protocol::detail::parse_line(line);
    request_id = j.value("request_id", std::string());
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "score_request") {
      const auto req = protocol::request_from_json(j);
      return protocol::serialize(scorer.score(req));
    }
    if (kind == "schedule") return scorer.control(line);
    return protocol::serialize_error(request_id, "unsupported message kind '" + kind + "'");
  } catch (const std::exception& e) {
    return protocol::serialize_error(request_id, e.what());
  }
}

inline void serve_stream(Scorer& scorer, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out << handle_message(scorer, line) << '\n';
    out.flush();
  }
}

// Installs the protocol handler on `server` at `path`. Concurrent HTTP
// requests are funneled through one mutex.
inline void install_http_handler(httplib::Server& server, Scorer& scorer, const std::string& path = "/score") {
  auto mu = std::make_shared<std::mutex>();
  server.Post(path, [&scorer, mu](const httplib::Request& req, httplib::Response& res) {
    std::string reply;
    {
      std::lock_guard lock(*mu);
      reply = handle_message(scorer, req.body);
    }
    res.status = protocol::kind_of(reply) == "error" ? 400 : 200;
    res.set_content(reply + "\n", "application/json");
  });
}

// ---------------------------------------------------------------------------

// Endpoint strings: "stdio:<shell command>" or "http://host:port[/path]".
inline std::unique_ptr<Scorer> connect(const std::string& endpoint, std::ptrdiff_t max_in_flight = 1) {
  if (endpoint.starts_with("stdio:")) {
    return std::make_unique<RemoteScorer>(std::make_unique<StdioChannel>(endpoint.substr(6)), max_in_flight);
  }
  if (endpoint.starts_with("http://")) {
    return std::make_unique<RemoteScorer>(std::make_unique<HttpChannel>(endpoint), max_in_flight);
  }
  throw std::invalid_argument("unsupported scorer endpoint '" + endpoint + "'");
}

}  // namespace docie::transport
