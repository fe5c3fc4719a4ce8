#include "alch/ode.hpp"

#include <cmath>

namespace alch {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 5th-minus-4th order error weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

std::vector<Vec> integrate_on_grid(const OdeRhs& rhs, const Vec& y0,
                                   std::span<const double> grid, const OdeOptions& opt) {
    if (grid.size() < 1) throw std::invalid_argument("integrate_on_grid: empty grid");
    const int m = static_cast<int>(y0.size());

    std::vector<Vec> out;
    out.reserve(grid.size());
    out.push_back(y0);

    double r = grid[0];
    Vec y = y0;
    Vec k1(m), k2(m), k3(m), k4(m), k5(m), k6(m), k7(m), ytmp(m), ynew(m), err(m);
    double h = opt.h_init;

    for (size_t gi = 1; gi < grid.size(); ++gi) {
        const double target = grid[gi];
        if (target <= r) throw std::invalid_argument("integrate_on_grid: grid not increasing");
        while (r < target) {
            h = std::min({h, opt.h_max, target - r});
            rhs(r, y, k1);
            for (;;) {
                ytmp = y + h * a21 * k1;
                rhs(r + c2 * h, ytmp, k2);
                ytmp = y + h * (a31 * k1 + a32 * k2);
                rhs(r + c3 * h, ytmp, k3);
                ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
                rhs(r + c4 * h, ytmp, k4);
                ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
                rhs(r + c5 * h, ytmp, k5);
                ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
                rhs(r + h, ytmp, k6);
                ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
                rhs(r + h, ynew, k7);
                err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

                double nrm = 0.0;
                for (int i = 0; i < m; ++i) {
                    double sc = opt.tol + opt.tol * std::max(std::abs(y(i)), std::abs(ynew(i)));
                    double q = err(i) / sc;
                    nrm += q * q;
                }
                nrm = std::sqrt(nrm / m);
                if (!std::isfinite(nrm))
                    throw OdeError("integrate_on_grid: non-finite state", r);

                if (nrm <= 1.0) {
                    r += h;
                    y = ynew;
                    double fac = (nrm == 0.0) ? 5.0 : 0.9 * std::pow(nrm, -0.2);
                    h *= std::clamp(fac, 0.2, 5.0);
                    break;
                }
                h *= std::clamp(0.9 * std::pow(nrm, -0.2), 0.2, 0.9);
                if (h < opt.h_min)
                    throw OdeError("integrate_on_grid: step size underflow (tolerance failure)", r);
            }
            if (opt.guard) {
                std::string msg = opt.guard(r, y);
                if (!msg.empty()) throw OdeError(msg, r);
            }
        }
        out.push_back(y);
    }
    return out;
}

std::vector<double> log_grid(double r_max, int npts) {
    if (npts < 2 || r_max <= 0.0) throw std::invalid_argument("log_grid: bad arguments");
    std::vector<double> g(npts);
    double tmax = std::log1p(r_max);
    for (int i = 0; i < npts; ++i) g[i] = std::expm1(tmax * i / (npts - 1));
    g.front() = 0.0;
    g.back() = r_max;
    return g;
}

std::vector<double> uniform_grid(double r_max, int npts) {
    if (npts < 2 || r_max <= 0.0) throw std::invalid_argument("uniform_grid: bad arguments");
    std::vector<double> g(npts);
    for (int i = 0; i < npts; ++i) g[i] = r_max * i / (npts - 1);
    return g;
}

}  // namespace alch
