#pragma once

// Scenario execution behind the command-line front end. Each action fills a
// Report, writes its artifacts into an output directory and maps failures to
// exit codes: 0 ok, 2 config error, 3 verification failure, 4 infeasible.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lqsim/report.hpp"
#include "lqsim/scenario.hpp"

namespace lqs {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitVerification = 3,
    kExitInfeasible = 4,
};

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance;
    std::string out_dir; // empty: no files written
    ReportFormat format = ReportFormat::Text;
    /// Largest physical register simulated as a statevector.
    std::size_t max_qubits = 20;
    bool svg = true;
};

struct RunResult {
    std::string scenario;
    std::string action;
    Report report;
    int exit_code = kExitOk;
};

/// Runs `action` (or the scenario's own action when empty).
RunResult run_scenario(const Scenario& scenario, const std::string& action, const RunOptions& options);

/// Loads every *.json under `dir` in name order and runs each with its own
/// action, concurrently, each in `out_dir/<name>`. The exit code is the
/// largest of the individual codes.
struct BatchResult {
    std::vector<RunResult> runs;
    Report summary;
    int exit_code = kExitOk;
};
BatchResult run_all(const std::string& dir, const RunOptions& options, std::size_t threads = 0);

/// Least-squares lambda for couplings against a pattern normalized to max |c| = 1.
double fitted_lambda(const PairMap& couplings, const PairMap& pattern);

/// Slope of log(err) against log(steps).
double log_log_slope(const std::vector<std::size_t>& steps, const std::vector<double>& errors);

} // namespace lqs
