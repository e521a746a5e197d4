#pragma once

// The commands behind the `vch` executable. Each returns a process exit code:
// 0 success, 1 runtime or check failure, 2 configuration or input error.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vch::cli {

struct RunRequest {
  std::optional<std::string> preset;
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> max_steps;
  std::optional<double> noise_range;
  std::optional<double> noise_motion;
  std::optional<bool> modifications;
  std::filesystem::path out = "out";
  bool verify = false;
  unsigned threads = 0;  // 0: hardware concurrency
};

int cmd_run(const RunRequest& req, std::ostream& out, std::ostream& err);

// Accepts trace files or directories holding trace*.csv.
int cmd_verify(const std::vector<std::filesystem::path>& traces, std::ostream& out, std::ostream& err);

struct PlotRequest {
  std::vector<std::filesystem::path> traces;
  std::filesystem::path out;  // "-" writes to the output stream
  bool trajectories = false;
  bool slices = false;
};

int cmd_plotdata(const PlotRequest& req, std::ostream& out, std::ostream& err);

// Trace files named by `paths`, with directories expanded in sorted order.
std::vector<std::filesystem::path> expand_traces(const std::vector<std::filesystem::path>& paths);

}  // namespace vch::cli
