#pragma once

#include <optional>
#include <string>

#include "alch/pipeline.hpp"

namespace alch {

inline constexpr const char* kToolName = "alchlab";
inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes: 0 all checks pass, 1 verification failure, 2 configuration
/// error, 3 numerical failure.
enum ExitCode : int { kOk = 0, kVerificationFailure = 1, kConfigError = 2, kNumericalFailure = 3 };

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> r_max;
    std::optional<double> tol;
};

/// Loads a scenario, runs the pipeline, writes report.json,
/// verification.json and series/*.csv under out_dir.
int cmd_run(const std::string& scenario_path, const std::string& out_dir, int jobs,
            const RunOverrides& overrides = {});

/// Runs the randomized curvature-identity suite; exit 0 iff the worst
/// residual is <= 1e-12.
int cmd_identities(int n, int trials, std::uint64_t seed);

/// Re-runs a scenario over a list of values of one parameter ("a" or
/// "r_max"), writing sweep.json / sweep.csv with the fitted exponents.
int cmd_sweep(const std::string& scenario_path, const std::string& param,
              const std::vector<double>& values, const std::string& out_dir, int jobs);

/// Serialization helpers shared with the test suites.
std::string format_double(double v);  // 17 significant digits
void write_outputs(const ScenarioResult& res, const std::string& out_dir,
                   double elapsed_seconds);

}  // namespace alch
