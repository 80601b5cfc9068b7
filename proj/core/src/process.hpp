#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace loopinv::detail {

struct ProcessResult {
  std::string stdout_text;
  std::string stderr_text;
  int exit_code = -1;
  bool timed_out = false;
  /// Set when the process could not be started at all.
  std::optional<std::string> spawn_error;
};

/// Runs `argv` with `input` on stdin, capturing stdout and stderr. The child
/// is killed once `timeout` of wall-clock time has elapsed.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input,
                          std::chrono::milliseconds timeout);

}  // namespace loopinv::detail
