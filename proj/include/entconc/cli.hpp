// SPDX-License-Identifier: Apache-2.0
#pragma once

// Experiment runner shared by the command-line tool and the Python module.
// A run is described by a flat key/value map; every key mirrors a flag of the
// tool (`eps=0.1,0.3` is `--eps 0.1 --eps 0.3`).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "entconc/error.hpp"
#include "entconc/report.hpp"

namespace entconc {

inline constexpr std::string_view kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitAssertion = 4;

/// Malformed or incomplete run configuration.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class Command { bounds, mc_tail, mgf_verify, oracle, counterexample, misspecified, coding, exponent };

std::string_view to_string(Command command) noexcept;
Command parse_command(std::string_view name);
std::vector<std::string_view> command_names();

/// Keys a command accepts besides command, seed, workers, out, format, curves.
const std::vector<std::string>& command_keys(Command command);

struct RunConfig {
  Command command = Command::bounds;
  /// Command-specific keys; list values are comma separated.
  std::map<std::string, std::string> parameters;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string output;  ///< empty writes the table to the output stream
  std::string format = "csv";
  std::string curves;  ///< optional path for long-format plot data
};

/// Flat "key=value" lines; '#' starts a comment. Repeated list keys (eps,
/// lambda, n, K) accumulate, any other repeat is an error.
std::map<std::string, std::string> parse_config_text(std::istream& in);

/// Validates keys and builds a RunConfig. Throws ConfigError.
RunConfig make_run_config(const std::map<std::string, std::string>& values);

struct RunOutcome {
  ConfigEcho config;  ///< resolved configuration, defaults included
  std::vector<Row> rows;
  std::vector<std::string> failures;  ///< violated assertions
  CurveAxis axis = CurveAxis::epsilon;
};

/// Computes the table. Throws ConfigError, Infeasible or DomainError.
RunOutcome execute(const RunConfig& config);

/// Executes, writes the table, manifest sidecar and curves, and maps errors to
/// exit codes: 2 configuration, 3 feasibility, 4 assertion failure.
int run(const RunConfig& config, std::ostream& out, std::ostream& diag);

}  // namespace entconc
