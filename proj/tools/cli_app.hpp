#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace gibbsmix::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kNonConvergence = 3,
};

/// Fully resolved configuration of one run; echoed into manifest.json.
struct RunConfig {
  std::string command;
  double a = 10.0;
  std::size_t n = 500;
  double delta = 0.05;
  std::size_t steps = 0;  // resolved per command when not given
  std::size_t max_steps = 200000;
  double epsilon = 0.25;
  std::size_t trajectories = 1;
  std::uint64_t seed = 0;
  std::string start = "0,0";
  std::string process = "X";
  double alpha = 0.10;
  double epsilon_slack = 0.0;
  std::size_t s = 50;
  std::size_t t = 50;
  bool table = false;
  unsigned threads = 0;
  std::filesystem::path out_dir;
};

nlohmann::json to_json(const RunConfig& config);

/// Parses argv, runs the command and returns the process exit status.
/// Machine-readable results go to `out`, usage errors and progress to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gibbsmix::cli
