#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "alch/linalg.hpp"

namespace alch {

struct OdeError : std::runtime_error {
    double r;
    OdeError(const std::string& what, double r_) : std::runtime_error(what), r(r_) {}
};

/// dy/dr = f(r, y)
using OdeRhs = std::function<void(double r, const Vec& y, Vec& dydr)>;

struct OdeOptions {
    double tol = 1e-10;     // used for both absolute and relative control
    double h_min = 1e-8;    // step-size floor; going below raises OdeError
    double h_max = 0.5;
    double h_init = 1e-3;
    // Optional guard evaluated after each accepted step; returning a
    // non-empty message aborts with OdeError at the current r.
    std::function<std::string(double r, const Vec& y)> guard;
};

/// Dormand-Prince 5(4) with proportional step control. Steps are clipped to
/// land exactly on the requested grid points, so no interpolation error
/// enters the reported values. grid must be strictly increasing and start
/// at the initial point.
std::vector<Vec> integrate_on_grid(const OdeRhs& rhs, const Vec& y0,
                                   std::span<const double> grid, const OdeOptions& opt = {});

/// Reporting grid on [0, r_max], geometrically refined near 0 (uniform in
/// log(1+r)), endpoints included.
std::vector<double> log_grid(double r_max, int npts);

std::vector<double> uniform_grid(double r_max, int npts);

}  // namespace alch
