#pragma once

// External error checker: a child process speaking line-delimited JSON on
// its standard streams.
//
//   request  {"id":<int>,"tokens":[...]}
//   response {"id":<int>,"errors":[{"start":i,"end":j,"category":"..."}]}
//
// Responses may arrive in any order and are matched by id. A session is a
// serialized conversation; ExternalCheckerDetector keeps a pool of sessions
// and hands each caller exclusive use of one. POSIX only.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <csignal>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gecmetric/corpus.hpp"
#include "gecmetric/detectors.hpp"
#include "gecmetric/error.hpp"

extern char** environ;

namespace gecmetric {

class CheckerSession {
 public:
  CheckerSession(std::vector<std::string> argv, std::string detector_id,
                 std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : detector_id_(std::move(detector_id)), timeout_(timeout) {
    if (argv.empty()) throw DetectorError(detector_id_, "empty checker command");
    std::signal(SIGPIPE, SIG_IGN);

    int to_child[2], from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) fail_errno("pipe");
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      fail_errno("pipe");
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);

    std::vector<char*> args;
    for (auto& a : argv) args.push_back(a.data());
    args.push_back(nullptr);
    const int rc = ::posix_spawnp(&pid_, args[0], &actions, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(to_child[0]);
    ::close(from_child[1]);
    if (rc != 0) {
      ::close(to_child[1]);
      ::close(from_child[0]);
      pid_ = -1;
      throw DetectorError(detector_id_, "cannot start '" + argv[0] + "': " + std::strerror(rc));
    }
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
    ::fcntl(in_fd_, F_SETFL, ::fcntl(in_fd_, F_GETFL) | O_NONBLOCK);
    ::fcntl(out_fd_, F_SETFL, ::fcntl(out_fd_, F_GETFL) | O_NONBLOCK);
  }

  CheckerSession(const CheckerSession&) = delete;
  CheckerSession& operator=(const CheckerSession&) = delete;

  ~CheckerSession() {
    if (in_fd_ >= 0) ::close(in_fd_);
    if (out_fd_ >= 0) ::close(out_fd_);
    if (pid_ > 0) {
      int status = 0;
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) != 0) return;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
  }

  // Sends every sentence, then collects the responses. Requests are written
  // while responses are read so that neither pipe can fill up and stall.
  std::vector<std::vector<ErrorSpan>> check(std::span<const Sentence> sentences) {
    if (broken_) throw DetectorError(detector_id_, "session is no longer usable");
    try {
      return exchange(sentences);
    } catch (...) {
      broken_ = true;
      throw;
    }
  }

 private:
  [[noreturn]] void fail_errno(const std::string& what) const {
    throw DetectorError(detector_id_, what + ": " + std::strerror(errno));
  }

  [[noreturn]] void fail_exited() {
    int status = 0;
    std::string detail = "checker process closed its output";
    if (pid_ > 0 && ::waitpid(pid_, &status, WNOHANG) == pid_) {
      pid_ = -1;
      if (WIFEXITED(status))
        detail = "checker process exited with status " + std::to_string(WEXITSTATUS(status));
      else if (WIFSIGNALED(status))
        detail = "checker process killed by signal " + std::to_string(WTERMSIG(status));
    }
    throw DetectorError(detector_id_, detail);
  }

  std::vector<std::vector<ErrorSpan>> exchange(std::span<const Sentence> sentences) {
    std::map<std::int64_t, std::size_t> pending;
    std::string outbuf;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      const std::int64_t id = next_id_++;
      pending.emplace(id, i);
      nlohmann::json req = {{"id", id}, {"tokens", nlohmann::json::array()}};
      for (const auto& t : sentences[i]) req["tokens"].push_back(t);
      outbuf += req.dump();
      outbuf += '\n';
    }
    std::vector<std::vector<ErrorSpan>> results(sentences.size());
    std::size_t written = 0;
    auto deadline = std::chrono::steady_clock::now() + timeout_;

    while (!pending.empty()) {
      pollfd fds[2];
      nfds_t nfds = 0;
      fds[nfds++] = {out_fd_, POLLIN, 0};
      const bool writing = written < outbuf.size();
      if (writing) fds[nfds++] = {in_fd_, POLLOUT, 0};
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0)
        throw DetectorError(detector_id_, "timed out after " + std::to_string(timeout_.count()) +
                                              " ms waiting for a response");
      const int rc = ::poll(fds, nfds, static_cast<int>(left.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        fail_errno("poll");
      }
      if (rc == 0) continue;

      if (writing && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
        const ssize_t n = ::write(in_fd_, outbuf.data() + written, outbuf.size() - written);
        if (n < 0 && errno != EAGAIN && errno != EINTR) {
          if (errno == EPIPE) fail_exited();
          fail_errno("write");
        }
        if (n > 0) written += static_cast<std::size_t>(n);
      }
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        char buf[4096];
        const ssize_t n = ::read(out_fd_, buf, sizeof buf);
        if (n == 0) fail_exited();
        if (n < 0) {
          if (errno == EAGAIN || errno == EINTR) continue;
          fail_errno("read");
        }
        inbuf_.append(buf, static_cast<std::size_t>(n));
        std::size_t nl;
        while ((nl = inbuf_.find('\n')) != std::string::npos) {
          std::string line = inbuf_.substr(0, nl);
          inbuf_.erase(0, nl + 1);
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (line.empty()) continue;
          handle_response(line, sentences, pending, results);
          deadline = std::chrono::steady_clock::now() + timeout_;
        }
      }
    }
    return results;
  }

  void handle_response(const std::string& line, std::span<const Sentence> sentences,
                       std::map<std::int64_t, std::size_t>& pending,
                       std::vector<std::vector<ErrorSpan>>& results) const {
    auto protocol_error = [&](const std::string& why) {
      return DetectorError(detector_id_, "protocol error (" + why + ") in response line: " + line);
    };
    nlohmann::json resp;
    try {
      resp = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw protocol_error("invalid JSON");
    }
    if (!resp.is_object() || !resp.contains("id") || !resp["id"].is_number_integer() ||
        !resp.contains("errors") || !resp["errors"].is_array())
      throw protocol_error("expected {\"id\":int,\"errors\":[...]}");
    const auto id = resp["id"].get<std::int64_t>();
    auto it = pending.find(id);
    if (it == pending.end()) throw protocol_error("unexpected id " + std::to_string(id));
    const std::size_t index = it->second;
    const std::size_t len = sentences[index].size();
    std::vector<ErrorSpan> spans;
    for (const auto& e : resp["errors"]) {
      if (!e.is_object() || !e.contains("start") || !e.contains("end") ||
          !e.contains("category") || !e["start"].is_number_integer() ||
          !e["end"].is_number_integer() || !e["category"].is_string())
        throw protocol_error("malformed error entry");
      const auto start = e["start"].get<std::int64_t>();
      const auto end = e["end"].get<std::int64_t>();
      if (start < 0 || end < start || static_cast<std::size_t>(end) > len)
        throw protocol_error("span out of bounds");
      spans.push_back({static_cast<std::size_t>(start), static_cast<std::size_t>(end),
                       e["category"].get<std::string>(), detector_id_});
    }
    results[index] = std::move(spans);
    pending.erase(it);
  }

  std::string detector_id_;
  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string inbuf_;
  std::int64_t next_id_ = 0;
  bool broken_ = false;
};

// Detector backed by a pool of checker sessions.
class ExternalCheckerDetector final : public Detector {
 public:
  ExternalCheckerDetector(std::vector<std::string> argv, std::size_t pool_size = 1,
                          std::string id = "external",
                          std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : id_(std::move(id)) {
    if (pool_size == 0) pool_size = 1;
    for (std::size_t i = 0; i < pool_size; ++i) {
      sessions_.push_back(std::make_unique<CheckerSession>(argv, id_, timeout));
      free_.push_back(sessions_.back().get());
    }
  }

  std::string id() const override { return id_; }

  std::vector<ErrorSpan> detect(const Sentence& s) const override {
    Lease lease(*this);
    return lease.session->check(std::span(&s, 1)).front();
  }

  // Contiguous chunks are checked concurrently, one session per chunk.
  std::vector<std::vector<ErrorSpan>> detect_all(std::span<const Sentence> sentences) const override {
    const std::size_t chunks = std::min(sessions_.size(), std::max<std::size_t>(1, sentences.size()));
    std::vector<std::vector<std::vector<ErrorSpan>>> parts(chunks);
    std::vector<std::exception_ptr> errors(chunks);
    std::vector<std::thread> workers;
    const std::size_t per = (sentences.size() + chunks - 1) / chunks;
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t lo = std::min(sentences.size(), c * per);
      const std::size_t hi = std::min(sentences.size(), lo + per);
      workers.emplace_back([&, c, lo, hi] {
        try {
          Lease lease(*this);
          parts[c] = lease.session->check(sentences.subspan(lo, hi - lo));
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
    std::vector<std::vector<ErrorSpan>> out;
    out.reserve(sentences.size());
    for (auto& p : parts)
      for (auto& r : p) out.push_back(std::move(r));
    return out;
  }

 private:
  struct Lease {
    explicit Lease(const ExternalCheckerDetector& d) : owner(d) {
      std::unique_lock lock(owner.mutex_);
      owner.available_.wait(lock, [&] { return !owner.free_.empty(); });
      session = owner.free_.back();
      owner.free_.pop_back();
    }
    ~Lease() {
      {
        std::lock_guard lock(owner.mutex_);
        owner.free_.push_back(session);
      }
      owner.available_.notify_one();
    }
    const ExternalCheckerDetector& owner;
    CheckerSession* session = nullptr;
  };

  std::string id_;
  std::vector<std::unique_ptr<CheckerSession>> sessions_;
  mutable std::vector<CheckerSession*> free_;
  mutable std::mutex mutex_;
  mutable std::condition_variable available_;
};

}  // namespace gecmetric
