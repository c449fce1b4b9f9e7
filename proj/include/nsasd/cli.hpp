#pragma once

// Command-line front end: orchestrates verification runs, solver jobs and
// report emission. Reports are JSON lines; exit code 0 means every verdict
// passed, 1 means at least one failed, 2 means a usage or config error.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsasd/jets.hpp"

namespace nsasd {

struct RunConfig {
  std::string subcommand;  // verify, lax, reduce, lift, solve-monopole, xray,
                           // petrov, topology, zoo
  std::string zooAction;   // list | eval
  std::string entry;       // zoo entry, EW structure, or manifold name
  int samples = 50;
  unsigned seed = 0;
  std::optional<Box> box;
  std::map<std::string, double> tolerances;
  std::map<std::string, std::string> overrides;  // potential expressions
  std::string output;    // report path; empty = stdout
  std::string csvPath;   // grid/xray CSV export
  std::string linesCsv;  // xray input lines
  int radius = 3;        // topology search radius
  int gridN = 12;        // solver grid nodes per axis
  double fdStep = 1e-2;  // xray FD step
};

// key = value lines, '#' comments; keys match the command-line flags.
RunConfig parse_config_file(const std::string& path);

// Applies one flag/value pair; returns false for unknown keys that are not
// parameter overrides.
bool apply_option(RunConfig& cfg, const std::string& key, const std::string& value);

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nsasd
