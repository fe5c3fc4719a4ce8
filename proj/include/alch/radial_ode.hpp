#pragma once

#include "alch/ode.hpp"
#include "alch/profile.hpp"

namespace alch {

/// Shape operator S(r) of the level hypersurfaces along one radial
/// geodesic, in the radially parallel frame {Jd_r, E_1..E_2n}, together
/// with the accumulated log of the volume density (d/dr log lambda = tr S).
struct ShapePath {
    int n = 1;
    std::vector<double> r;
    std::vector<Mat> S;
    std::vector<double> log_lambda;
    double S0_norm = 0.0;

    const Mat& at(size_t i) const { return S[i]; }
    size_t size() const { return r.size(); }
};

/// S' = -S^2 - R_{d_r}(r); S symmetrized after every accepted step.
/// Throws OdeError when ||S|| crosses the blow-up threshold (focal point /
/// invalid input) or on tolerance failure.
ShapePath integrate_riccati(const Mat& S0, const CurvatureProfile& profile,
                            std::span<const double> grid, double tol = 1e-10);

/// Component functions of one normal Jacobi field in the weighted frame:
/// Y_v = comp(0) e^r Jd_r + sum_j comp(j) e^{r/2} E_j.
struct JacobiPath {
    int n = 1;
    Vec v;                     // initial boundary vector, frame {Jnu, e_1..e_2n}
    std::vector<double> r;
    Mat comp;                  // (2n+1) x npts, row i = eta^i(r)
    Mat dcomp;                 // radial derivatives

    size_t size() const { return r.size(); }

    /// Ambient components of Y_v(r_k) in {d_r, Jd_r, E_1..E_2n}.
    Vec ambient(size_t k) const;
    /// Ambient components of SY_v = nabla_r Y_v, reconstructed from the
    /// component derivatives.
    Vec ambient_derivative(size_t k) const;
    double norm(size_t k) const { return ambient(k).norm(); }
};

/// Initial data for the component system given v and S(0):
/// eta(0) = v_0, eta'(0) = (S0 v - v)_0, eta^k(0) = v_k,
/// (eta^k)'(0) = (S0 v - v/2)_k.
void jacobi_initial_data(const Vec& v, const Mat& S0, Vec& eta0, Vec& deta0);

/// Direct integration of the second-order component system
///   eta''   + 2 eta'   = sum_k u(0,k) eta^k
///   (eta^j)'' + (eta^j)' = sum_k u(j,k) eta^k.
JacobiPath integrate_jacobi(const Vec& v, const Mat& S0, const CurvatureProfile& profile,
                            std::span<const double> grid, double tol = 1e-10);

/// Picard iteration on the equivalent integral system with kernels
/// (1 - e^{-2(r-s)})/2 and 1 - e^{-(r-s)}, on a uniform grid refined until
/// two resolutions agree below quad_tol. Independent of integrate_jacobi;
/// the two serve as mutual oracles.
JacobiPath integrate_jacobi_duhamel(const Vec& v, const Mat& S0,
                                    const CurvatureProfile& profile, double r_max,
                                    double quad_tol = 1e-9, int base_points = 2048);

struct VolumePath {
    std::vector<double> r;
    std::vector<double> lambda;
    std::vector<double> log_lambda;
};

/// lambda(r) = exp( int_0^r trace S ). Uses the integral accumulated during
/// the Riccati integration when present, otherwise composite Simpson on the
/// stored grid.
VolumePath integrate_volume(const ShapePath& shape);

enum class ScalarKind { f, fj };

/// Scalar limit ODE f'' - f = h (kind f) or f'' - f/4 = h (kind fj), with
/// the leading coefficient alpha extracted by variation of constants:
///   alpha   = 1/2 (f(0) + f'(0)) + 1/2 int_0^inf e^{-s} h(s) ds
///   alpha^j = 1/2 f(0) + f'(0) + int_0^inf e^{-s/2} h(s) ds.
/// The improper integral is truncated at r_max; the analytic tail bound
/// from |h| <= source_coef e^{(2-min_order)r} is reported.
struct ScalarLimitPath {
    ScalarKind kind;
    std::vector<double> r;
    std::vector<double> f;
    std::vector<double> df;
    std::vector<double> source;
    std::vector<double> residual;  // |f - alpha e^{mu r}|, mu = 1 or 1/2
    double alpha = 0.0;
    double alpha_tail_bound = 0.0;
};

ScalarLimitPath integrate_scalar_limits(ScalarKind kind, double f0, double df0,
                                        const std::function<double(double)>& source,
                                        double source_coef, double min_order,
                                        std::span<const double> grid, double tol = 1e-10);

}  // namespace alch
