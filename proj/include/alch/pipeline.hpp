#pragma once

#include <optional>

#include "alch/boundary.hpp"
#include "alch/scenario.hpp"

namespace alch {

/// Everything computed for one scenario: the profile, the radial paths for
/// a full boundary basis, the extracted boundary data, and the evaluated
/// verification table.
struct ScenarioResult {
    Scenario scenario;
    CurvatureProfile profile;
    JFrame frame{1};
    std::vector<double> grid;
    ShapePath shape;
    VolumePath volume;
    std::vector<JacobiPath> paths;
    std::optional<BoundaryData> boundary;
    std::optional<JacobiPath> contact_kernel_path;  // Jacobi path of an H-vector
    std::optional<DecayFit> contact_kernel_growth;
    std::optional<ScalarLimitPath> scalar_f;
    std::optional<ScalarLimitPath> scalar_fj;
    double duhamel_sup_diff = 0.0;
    VerificationReport verification;
};

/// Runs the whole per-geodesic pipeline for one scenario. Jacobi and
/// Duhamel integrations for the basis vectors run as independent tasks on
/// up to `jobs` threads; results are identical for any job count.
ScenarioResult run_scenario_pipeline(const Scenario& sc, int jobs = 1);

/// Evaluates every envelope and invariant for an already-computed result,
/// filling result.verification. Exposed separately for tests.
VerificationReport build_verification(ScenarioResult& result);

/// Tolerance on fitted decay exponents (finite-window log-linear bias).
inline constexpr double kExponentTol = 0.1;

/// Parallel map helper: runs tasks[i] for i in [0, count) on `jobs`
/// threads. Output slots are written by index, so the result does not
/// depend on the thread count.
void parallel_for(int count, int jobs, const std::function<void(int)>& task);

}  // namespace alch
