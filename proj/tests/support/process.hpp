#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <sys/types.h>
#include <vector>

namespace jf::testing {

/// A child process with its stdout on a pipe; stderr goes to `stderr_path`.
class Process {
 public:
  Process(const std::vector<std::string>& argv, const std::string& stderr_path);
  ~Process();
  Process(const Process&) = delete;
  Process& operator=(const Process&) = delete;

  /// Next stdout line, or nullopt on EOF or timeout.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);
  /// Remaining stdout until EOF.
  std::string read_all(std::chrono::milliseconds timeout);
  bool eof() const { return eof_; }
  void kill(int signal);
  /// Exit code, or -signal when killed by one.
  int wait();

 private:
  pid_t pid_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
  bool reaped_ = false;
  bool eof_ = false;
  int status_ = 0;
};

struct RunResult {
  int exit_code = -1;
  std::string out;
};

/// Runs to completion, capturing stdout.
RunResult run_process(const std::vector<std::string>& argv, const std::string& stderr_path,
                      std::chrono::milliseconds timeout);

}  // namespace jf::testing
