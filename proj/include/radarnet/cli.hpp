#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "radarnet/simkit.hpp"

namespace radarnet::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

struct RunConfig {
  std::string scenario = "non_saturated";
  std::string scenario_file;  // overrides `scenario` when set
  std::vector<sim::Method> methods{sim::Method::Cbba, sim::Method::Central};
  std::vector<std::uint64_t> seeds{1};
  int ticks = 200;
  std::string out_dir = "out";
  long time_limit_ms = 0;
  long node_limit = 200'000;
  std::string comm_graph = "complete";  // or a JSON file
  std::optional<double> gamma;
  std::optional<double> budget;
  std::string transcript;  // CBBA message log of the first seed, if set
  unsigned jobs = 1;
};

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_solve(const std::string& instance_file, long time_limit_ms, std::ostream& out, std::ostream& err);
int cmd_replay(const std::string& transcript_file, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace radarnet::cli
