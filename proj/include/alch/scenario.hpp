#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "alch/profile.hpp"

namespace alch {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Minimal TOML reader covering the scenario schema: [section] headers,
/// key = value with strings, numbers, booleans, and (nested) arrays of
/// numbers. Errors carry line numbers.
namespace toml_lite {

struct Value;
using Array = std::vector<Value>;
struct Value : std::variant<std::string, double, bool, Array> {
    using variant::variant;
};
using Table = std::map<std::string, Value>;
using Document = std::map<std::string, Table>;

Document parse_file(const std::string& path);
Document parse_string(const std::string& text, const std::string& origin = "<string>");

}  // namespace toml_lite

enum class ScenarioKind { Model, Random, Warped };

struct Scenario {
    ScenarioKind kind = ScenarioKind::Model;
    int n = 1;
    std::uint64_t seed = 1;

    double a = std::numeric_limits<double>::infinity();
    double C0 = 0.0;
    double b = std::numeric_limits<double>::infinity();
    double C1 = 0.0;

    double r_max = 30.0;
    double tol = 1e-10;
    int grid_points = 257;

    // "model_sphere(r0)" or an explicit symmetric matrix.
    double sphere_radius = 1.0;
    std::optional<Mat> explicit_S0;
    std::optional<Mat> explicit_basis;  // columns = initial tangent vectors

    bool extract = true;
    double epsilon = 0.25;  // volume lower-bound parameter
    std::optional<double> c0_check_override;  // envelope validation constant

    // warped-profile family: A = sinh(r + r0A)(1 + epsA e^{-kA r}), and the
    // same shape with half arguments for B.
    double warp_r0_a = 1.0, warp_eps_a = 0.0, warp_k_a = 2.0;
    double warp_r0_b = 1.0, warp_eps_b = 0.0, warp_k_b = 2.0;

    std::string out_dir = "out";
    std::vector<std::string> series;

    std::vector<std::string> warnings;  // hypothesis caveats

    Mat initial_shape_operator() const;
    Mat initial_basis() const;  // default: identity
    CurvatureProfile make_profile() const;
};

/// Parses and validates a scenario file. Violations of hard hypotheses
/// (extraction with a <= 1/2) throw; soft ones (rank conclusions with
/// a <= 1) are recorded as warnings.
Scenario load_scenario(const std::string& path);
Scenario scenario_from_document(const toml_lite::Document& doc);

}  // namespace alch
