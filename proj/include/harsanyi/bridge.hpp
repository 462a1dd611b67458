#pragma once

// Subprocess line protocol for external value functions.
//
// Request (one JSON object per line on the evaluator's stdin):
//   {"id":7,"sample":[0.5,1.0],"baseline":[0.0,0.0],"mask":"10"}
// Response (one per line on its stdout, any order, matched by id):
//   {"id":7,"value":0.5}
//
// mask character j is variable j; '0' means variable j takes its baseline
// value. The evaluator must answer every request exactly once.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <regex>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "harsanyi/error.hpp"
#include "harsanyi/lattice.hpp"

namespace harsanyi {

struct EvalRequest {
  std::int64_t id = 0;
  std::vector<double> sample;
  std::vector<double> baseline;
  std::string mask;
};

struct EvalResponse {
  std::int64_t id = 0;
  double value = 0.0;
};

inline std::string encode_request(const EvalRequest& r) {
  if (r.sample.size() != r.baseline.size() || r.sample.size() != r.mask.size()) {
    throw DimensionError("request " + std::to_string(r.id) +
                         ": sample, baseline and mask lengths differ");
  }
  if (r.mask.find_first_not_of("01") != std::string::npos) {
    throw DimensionError("request " + std::to_string(r.id) + ": mask must be a 0/1 string");
  }
  nlohmann::json j;
  j["id"] = r.id;
  j["sample"] = r.sample;
  j["baseline"] = r.baseline;
  j["mask"] = r.mask;
  return j.dump();
}

inline EvalRequest decode_request(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed request line: ") + e.what());
  }
  try {
    EvalRequest r;
    r.id = j.at("id").get<std::int64_t>();
    r.sample = j.at("sample").get<std::vector<double>>();
    r.baseline = j.at("baseline").get<std::vector<double>>();
    r.mask = j.at("mask").get<std::string>();
    if (r.sample.size() != r.baseline.size() || r.sample.size() != r.mask.size() ||
        r.mask.find_first_not_of("01") != std::string::npos) {
      throw ProtocolError("inconsistent request " + std::to_string(r.id));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("bad request fields: ") + e.what());
  }
}

inline std::string encode_response(const EvalResponse& r) {
  nlohmann::json j;
  j["id"] = r.id;
  if (std::isfinite(r.value)) {
    j["value"] = r.value;
    return j.dump();
  }
  // JSON has no NaN/Infinity; emit the common bare tokens.
  const std::string token =
      std::isnan(r.value) ? "NaN" : (r.value > 0 ? "Infinity" : "-Infinity");
  return "{\"id\":" + std::to_string(r.id) + ",\"value\":" + token + "}";
}

// Parses one response line. Bare NaN/Infinity tokens are accepted so that
// the error can name the offending id.
inline EvalResponse decode_response(const std::string& line) {
  static const std::regex non_finite(R"(:\s*[-+]?(NaN|nan|Infinity|inf)\b)");
  std::string text = line;
  bool flagged = false;
  if (std::regex_search(text, non_finite)) {
    text = std::regex_replace(text, non_finite, ":null");
    flagged = true;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("malformed response line: '" + line + "'");
  }
  if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer()) {
    throw ProtocolError("response without integer id: '" + line + "'");
  }
  EvalResponse r;
  r.id = j["id"].get<std::int64_t>();
  if (!j.contains("value")) {
    throw ProtocolError("response " + std::to_string(r.id) + " has no value");
  }
  const auto& v = j["value"];
  if (flagged || v.is_null()) {
    throw ProtocolError("response " + std::to_string(r.id) + " carries a non-finite value");
  }
  if (!v.is_number()) {
    throw ProtocolError("response " + std::to_string(r.id) + " value is not a number");
  }
  r.value = v.get<double>();
  if (!std::isfinite(r.value)) {
    throw ProtocolError("response " + std::to_string(r.id) + " carries a non-finite value");
  }
  return r;
}

struct EvaluatorOptions {
  // Seconds without any response before giving up.
  double timeout_seconds = 30.0;
  // Maximum requests written but not yet answered.
  std::size_t pipeline_depth = 64;
};

// A child process started with /bin/sh -c <command>, speaking the line
// protocol on its stdin/stdout. stderr is inherited.
class EvaluatorProcess {
 public:
  explicit EvaluatorProcess(const std::string& command, EvaluatorOptions options = {})
      : options_(options) {
    if (options_.pipeline_depth == 0) throw DimensionError("pipeline depth must be >= 1");
    ::signal(SIGPIPE, SIG_IGN);
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe(in_pipe) != 0) throw ProtocolError("pipe failed: " + std::string(std::strerror(errno)));
    if (::pipe(out_pipe) != 0) {
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      throw ProtocolError("pipe failed: " + std::string(std::strerror(errno)));
    }
    pid_ = ::fork();
    if (pid_ < 0) {
      for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
      throw ProtocolError("fork failed: " + std::string(std::strerror(errno)));
    }
    if (pid_ == 0) {
      // Own process group, so shutdown also reaches anything the shell spawned.
      ::setpgid(0, 0);
      ::dup2(in_pipe[0], STDIN_FILENO);
      ::dup2(out_pipe[1], STDOUT_FILENO);
      for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    ::fcntl(to_child_, F_SETFL, ::fcntl(to_child_, F_GETFL) | O_NONBLOCK);
    ::fcntl(from_child_, F_SETFL, ::fcntl(from_child_, F_GETFL) | O_NONBLOCK);
    ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
    ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
  }

  EvaluatorProcess(const EvaluatorProcess&) = delete;
  EvaluatorProcess& operator=(const EvaluatorProcess&) = delete;

  ~EvaluatorProcess() { shutdown(); }

  // Sends all requests (at most pipeline_depth in flight) and returns the
  // values in request order. With last_batch the request stream is closed
  // once everything is written, so evaluators that buffer until end of input
  // still answer; the process cannot be reused afterwards.
  std::vector<double> evaluate(const std::vector<EvalRequest>& requests, bool last_batch = false) {
    if (from_child_ < 0) throw ProtocolError("evaluator stream already closed");
    if (to_child_ < 0 && !requests.empty()) throw ProtocolError("evaluator input already closed");
    std::map<std::int64_t, std::size_t> slot;
    for (std::size_t k = 0; k < requests.size(); ++k) {
      if (!slot.emplace(requests[k].id, k).second) {
        throw DimensionError("duplicate request id " + std::to_string(requests[k].id));
      }
    }
    std::vector<double> values(requests.size(), 0.0);
    std::vector<char> answered(requests.size(), 0);
    std::size_t next = 0;       // next request to encode
    std::size_t remaining = requests.size();
    std::size_t in_flight = 0;
    std::string out_buf;
    std::size_t out_pos = 0;
    auto last_progress = std::chrono::steady_clock::now();

    while (remaining > 0) {
      while (out_pos == out_buf.size() && next < requests.size() &&
             in_flight < options_.pipeline_depth) {
        out_buf = encode_request(requests[next++]) + "\n";
        out_pos = 0;
        ++in_flight;
        if (!write_some(out_buf, out_pos)) break;
      }
      if (last_batch && to_child_ >= 0 && next == requests.size() && out_pos == out_buf.size()) {
        ::close(to_child_);
        to_child_ = -1;
      }

      pollfd fds[2];
      nfds_t count = 0;
      fds[count++] = {from_child_, POLLIN, 0};
      const bool want_write = to_child_ >= 0 && out_pos < out_buf.size();
      if (want_write) fds[count++] = {to_child_, POLLOUT, 0};
      const int rc = ::poll(fds, count, 50);
      if (rc < 0 && errno != EINTR) {
        throw ProtocolError("poll failed: " + std::string(std::strerror(errno)));
      }
      if (want_write && count == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
        write_some(out_buf, out_pos);
      }
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        const bool eof = read_some();
        if (eof && !in_buf_.empty() && in_buf_.back() != '\n') in_buf_ += '\n';
        std::string line;
        while (take_line(line)) {
          if (line.empty()) continue;
          const EvalResponse r = decode_response(line);
          const auto it = slot.find(r.id);
          if (it == slot.end()) {
            throw ProtocolError("response for unknown id " + std::to_string(r.id));
          }
          if (answered[it->second]) {
            throw ProtocolError("duplicate response for id " + std::to_string(r.id));
          }
          if (it->second >= next) {
            throw ProtocolError("response for id " + std::to_string(r.id) +
                                " before it was requested");
          }
          answered[it->second] = 1;
          values[it->second] = r.value;
          --remaining;
          --in_flight;
          last_progress = std::chrono::steady_clock::now();
        }
        if (eof && remaining > 0) {
          close_fds();
          throw ProtocolError("evaluator closed its output with " +
                              std::to_string(remaining) + " requests unanswered; first missing id " +
                              std::to_string(first_missing(requests, answered)));
        }
      }
      const double idle = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                        last_progress)
                              .count();
      if (remaining > 0 && idle > options_.timeout_seconds) {
        std::ostringstream secs;
        secs << options_.timeout_seconds;
        throw ProtocolError("timeout after " + secs.str() + " s waiting for id " +
                            std::to_string(first_missing(requests, answered)));
      }
    }
    return values;
  }

  // Closes the request stream and reaps the child, killing it if it lingers.
  void shutdown() {
    close_fds();
    if (pid_ <= 0) return;
    int status = 0;
    for (int i = 0; i < 100; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) != 0) {
        ::kill(-pid_, SIGKILL);  // stragglers left by the shell
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(-pid_, SIGKILL);
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }

 private:
  // Returns false if the pipe is full.
  bool write_some(const std::string& buf, std::size_t& pos) {
    while (pos < buf.size()) {
      const ssize_t w = ::write(to_child_, buf.data() + pos, buf.size() - pos);
      if (w > 0) {
        pos += static_cast<std::size_t>(w);
        continue;
      }
      if (w < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) return false;
      if (w < 0 && errno == EINTR) continue;
      // Broken pipe: the child stopped reading. Remaining answers decide.
      pos = buf.size();
      return false;
    }
    return true;
  }

  // Returns true at end of stream.
  bool read_some() {
    char chunk[65536];
    while (true) {
      const ssize_t r = ::read(from_child_, chunk, sizeof chunk);
      if (r > 0) {
        in_buf_.append(chunk, static_cast<std::size_t>(r));
        continue;
      }
      if (r == 0) return true;
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) return false;
      return true;
    }
  }

  bool take_line(std::string& line) {
    const auto nl = in_buf_.find('\n');
    if (nl == std::string::npos) return false;
    line.assign(in_buf_, 0, nl);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    in_buf_.erase(0, nl + 1);
    return true;
  }

  static std::int64_t first_missing(const std::vector<EvalRequest>& requests,
                                    const std::vector<char>& answered) {
    for (std::size_t k = 0; k < requests.size(); ++k) {
      if (!answered[k]) return requests[k].id;
    }
    return -1;
  }

  void close_fds() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    to_child_ = from_child_ = -1;
  }

  EvaluatorOptions options_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string in_buf_;
};

// v(x_T) for every T via the evaluator. Request ids continue from first_id.
// last_batch as in EvaluatorProcess::evaluate.
inline ValueTable bridge_value_table(EvaluatorProcess& process, std::span<const double> sample,
                                     std::span<const double> baseline,
                                     std::int64_t first_id = 0, bool last_batch = false) {
  if (sample.size() != baseline.size()) throw DimensionError("sample and baseline differ in length");
  const int n = static_cast<int>(sample.size());
  check_variable_count(n);
  std::vector<EvalRequest> requests(table_size(n));
  for (Mask m = 0; m < requests.size(); ++m) {
    requests[m] = {first_id + static_cast<std::int64_t>(m),
                   {sample.begin(), sample.end()},
                   {baseline.begin(), baseline.end()},
                   to_bitstring(m, n)};
  }
  return ValueTable(n, process.evaluate(requests, last_batch));
}

}  // namespace harsanyi
