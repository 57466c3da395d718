#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "akf/harness.hpp"
#include "akf/scenario.hpp"

namespace akf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNonConvergence = 3;
inline constexpr int kExitCheckFailure = 4;

struct RunOptions {
  /// Artifacts go to out_dir / scenario name; empty disables writing.
  std::filesystem::path out_dir;
  /// Overrides the Picard tolerance of the scenario.
  std::optional<double> tol;
};

struct RunOutcome {
  int exit_code = kExitOk;
  bool converged = false;
  std::string failing_check;
  std::vector<BoundCheck> checks;
  IterationDiagnostics diagnostics;
  std::vector<std::string> warnings;
  std::filesystem::path output;
};

/// Runs the driver and the harness on a validated scenario and writes the
/// artifacts. Library errors propagate.
RunOutcome run_scenario(const Scenario& scenario, const RunOptions& options);

/// CLI entry points; they translate errors into the exit-code contract and
/// write human-readable progress to `out` and diagnostics to `err`.
int run_command(const std::vector<std::string>& targets, const std::vector<std::string>& overrides,
                const RunOptions& options, int jobs, std::ostream& out, std::ostream& err);
int check_command(const std::string& target, const std::vector<std::string>& overrides, std::ostream& out,
                  std::ostream& err);
int list_checks_command(std::ostream& out);
int describe_command(const std::string& name, std::ostream& out, std::ostream& err);

/// JSON array of {name, paper_anchor, worst_slack, worst_time, worst_cell, verdict, tolerance}.
std::string checks_json(const std::vector<BoundCheck>& checks);

}  // namespace akf
