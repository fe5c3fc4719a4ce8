#pragma once

#include "alch/frame.hpp"
#include "alch/radial_ode.hpp"
#include "alch/verify.hpp"

namespace alch {

/// Limit of one component function with its tail diagnostics.
struct CoframeEstimate {
    double raw = 0.0;          // value at r_max
    double limit = 0.0;        // raw + geometric tail step
    double rate = 0.0;         // fitted decay rate of the derivative
    double uncertainty = 0.0;  // |last correction| plus round-off floor
    DecayFit fit;
    bool exact = false;        // derivative below round-off: limit is raw
    bool converged = false;
};

/// Limiting coframe {eta, eta^1..eta^2n} on the boundary basis.
/// Row i of C is the i-th covector; column j evaluates on basis vector j.
struct Coframe {
    int n = 1;
    Mat C;
    Mat C_raw;
    std::vector<std::vector<CoframeEstimate>> comp;  // [row][path]
    DecayFit eta_decay;    // aggregate |eta_r - eta| over all paths
    DecayFit etaj_decay;   // aggregate over transverse rows
    bool converged = true;
};

/// Tail-extrapolated limits from 2n+1 Jacobi paths on a common grid.
/// Each component takes the value at r_max plus one geometric Richardson
/// step: limit = v(r_max) + v'(r_max) / rate, with the rate fitted on
/// |v'| over [window_lo, window_hi].
Coframe extract_coframe(const std::vector<JacobiPath>& paths, double window_lo,
                        double window_hi);

RankInfo coframe_rank_check(const Coframe& cf);

/// gamma_H = sum_j eta^j (x) eta^j as a bilinear form on the basis. PSD
/// with kernel spanned by the dual vector xi.
Mat assemble_carnot(const Coframe& cf);

/// Columns: xi, xi_1, ..., xi_2n (inverse of the coframe matrix).
Mat dual_frame(const Coframe& cf);

/// phi = sum_k eta^{2k-1} (x) xi_{2k} - eta^{2k} (x) xi_{2k-1}.
Mat compute_phi(const Coframe& cf, const Mat& dual);

/// Coframe matrix at one grid index (rows = eta_r, eta^j_r on the basis).
Mat coframe_at(const std::vector<JacobiPath>& paths, size_t k);

/// d eta via the shape-operator formula
/// d eta_r(u,v) = e^{-r} ( g(Y_v, J S Y_u) - g(Y_u, J S Y_v) ),
/// with S Y reconstructed from the component derivatives. The limit is
/// cross-checked against the closed form sum_k eta^{2k-1} ^ eta^{2k}.
struct DetaResult {
    std::vector<double> r;
    std::vector<Mat> series;   // antisymmetric matrix at each grid point
    Mat limit;                 // tail value of the formula route
    Mat closed;                // wedge closed form from the extracted coframe
    double discrepancy = 0.0;  // max |limit - closed|
    double tail_change = 0.0;  // |last variation|, convergence indicator
};

DetaResult compute_deta(const JFrame& frame, const std::vector<JacobiPath>& paths,
                        const Coframe& cf);

/// Integrability residuals. Series are evaluated from the finite-r tensors
/// in pulled-back coordinates; "window" values take the max over
/// [window_lo, window_hi] and decrease as the integration range grows,
/// while "limit" values compare tail extrapolations (they sit at the
/// extraction noise floor on converged runs).
struct NijenhuisResult {
    double residual_limit = 0.0;    // max_H ||N_phi(u,v) - deta(u,v) xi||
    double residual_window = 0.0;
    double oneone_limit = 0.0;      // max_H |deta(phi u, v) + deta(u, phi v)|
    double oneone_window = 0.0;
    DecayFit residual_fit;          // decay of the finite-r residual series
    DecayFit oneone_fit;
    std::vector<double> r;
    std::vector<double> residual_series;
    std::vector<double> oneone_series;
    std::vector<double> commutator_series;  // ||S_r phi_r - phi_r S_r||_g
};

NijenhuisResult nijenhuis_check(const JFrame& frame, const std::vector<JacobiPath>& paths,
                                const ShapePath& shape, const Coframe& cf,
                                const DetaResult& deta, double window_lo, double window_hi);

/// Remainder h_r = g_r - e^{2r} eta (x) eta - e^r gamma_H and the fitted
/// growth exponent of its norm.
struct MetricExpansionResult {
    std::vector<double> r;
    std::vector<double> remainder_norm;
    DecayFit fit;  // fit.growth() is the growth exponent
};

MetricExpansionResult metric_expansion_check(const std::vector<JacobiPath>& paths,
                                             const Coframe& cf, double window_lo,
                                             double window_hi);

/// ||S_r - (Id + eta (x) xi)/2||_g and ||S_r phi_r - phi_r S_r||_g with
/// fitted decay exponents (both should decay at rate >= 1 - tol).
struct ShapeAsymptoticsResult {
    std::vector<double> r;
    std::vector<double> s_residual;
    std::vector<double> commutator_residual;
    DecayFit s_fit;
    DecayFit commutator_fit;
};

ShapeAsymptoticsResult shape_asymptotics_check(const JFrame& frame, const ShapePath& shape,
                                               const std::vector<JacobiPath>& paths,
                                               const Coframe& cf, const Mat& dual,
                                               double window_lo, double window_hi);

/// ||Y_v - Z_v|| and ||S Y_v - Z'_v|| series for one path, built from the
/// extracted limits; used for the convergence-regime fits.
struct AsymptoticVectorsResult {
    std::vector<double> r;
    std::vector<double> y_minus_z;
    std::vector<double> sy_minus_zp;
    DecayFit y_fit;
    DecayFit sy_fit;
};

AsymptoticVectorsResult asymptotic_vectors_check(const JacobiPath& path, const Coframe& cf,
                                                 int path_index, double window_lo,
                                                 double window_hi);

/// Full boundary data at one point.
struct BoundaryData {
    Coframe coframe;
    RankInfo rank;
    Mat gammaH;
    Mat dual;
    Vec xi;
    Mat phi;
    DetaResult deta;
    NijenhuisResult nijenhuis;
    MetricExpansionResult expansion;
    ShapeAsymptoticsResult shape_asym;
    std::vector<AsymptoticVectorsResult> yz;
    double contact_volume = 0.0;
};

struct ExtractionOptions {
    double window_lo = 0.0, window_hi = 0.0;  // 0,0 -> [r_max/2, r_max]
};

BoundaryData extract_boundary_data(const JFrame& frame, const ShapePath& shape,
                                   const std::vector<JacobiPath>& paths,
                                   const ExtractionOptions& opt = {});

}  // namespace alch
