#pragma once

#include <iostream>
#include <string>
#include <vector>

#include "satctl/sim.hpp"

namespace satctl {

// Builds a validated scenario from a JSON document. The schema is documented
// in the repository README; unknown or ill-typed fields raise ConfigError
// naming the offending field, as do malformed documents (with the parser's
// position information).
ScenarioConfig parse_scenario(const std::string& text);

// Reads the file and parses it; file-system problems raise ConfigError
// naming the path.
ScenarioConfig load_scenario(const std::string& path);

// Trajectory CSV: one header row, then one row per node with every float
// printed to 17 significant digits so parsing the file reproduces each value
// bit for bit. Margin/envelope cells are empty for unconstrained runs.
// Columns: t, x1..xn, u, u_c, y_d, phi1..phin, varrho, lyap, margin_lower,
// margin_upper, env_lower, env_upper.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

// Parses a file emitted by write_trajectory_csv. The closed-form energy rate
// is not a CSV column, so the rows come back with lyap_dot = NaN.
Trajectory read_trajectory_csv(const std::string& path);

// One executed initial condition with its post-hoc monitor findings.
struct CompletedRun {
  std::string label;
  RunResult result;
  std::vector<MonitorFinding> findings;
};

// summary.json: scenario echo, input extrema across all runs at the top
// level, then one entry per run with its aggregates and findings.
void write_summary_json(const std::vector<CompletedRun>& runs,
                        const ScenarioConfig& scenario,
                        const std::string& path);

// Four-panel SVG (output vs reference with corridor, input with rails,
// command, tracking error with envelope), generated directly as polylines.
void write_plots_svg(const Trajectory& traj, const ScenarioConfig& scenario,
                     const std::string& path);

// Simulates every initial condition of the scenario (concurrently when there
// is more than one), runs the trajectory monitors, and — when out_dir is
// non-empty — writes the artifacts selected by the scenario's output flags.
// File names carry a per-condition suffix (trajectory_<label>.csv) when the
// scenario has several conditions, and are unsuffixed for a single one;
// summary.json always covers all runs. Aborted runs rethrow after every
// launched run has finished.
std::vector<CompletedRun> execute_scenario(const ScenarioConfig& scenario,
                                           const std::string& out_dir);

// Command-line entry point:
//   run    --scenario <file> --out <dir>   simulate, monitor, write artifacts
//   verify --scenario <file>               simulate and monitor, no files
//   bounds --xi <value> --scenario <file>  print the confinement certificate
// Exit codes: 0 success, 2 certified-property violation, 3 configuration
// error, 4 numerical failure. Reports go to `out`/`err` (overridable for
// tests).
int run_command(int argc, const char* const* argv,
                std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace satctl
