#include "alch/radial_ode.hpp"

#include <cmath>

namespace alch {

namespace {
constexpr double kBlowupThreshold = 1e6;
}

ShapePath integrate_riccati(const Mat& S0, const CurvatureProfile& profile,
                            std::span<const double> grid, double tol) {
    const int m = 2 * profile.n + 1;
    if (S0.rows() != m || S0.cols() != m)
        throw std::invalid_argument("integrate_riccati: S0 has wrong dimension");
    if ((S0 - S0.transpose()).norm() > 1e-12 * std::max(1.0, S0.norm()))
        throw std::invalid_argument("integrate_riccati: S0 must be symmetric");

    // State: m*m matrix entries + accumulated int trace S.
    auto unpack = [m](const Vec& y) {
        return Eigen::Map<const Mat>(y.data(), m, m);
    };
    OdeRhs rhs = [&profile, m, unpack](double r, const Vec& y, Vec& dy) {
        Mat S = unpack(y);
        Mat dS = -(S * S) - jacobi_operator(profile, r);
        dy.resize(m * m + 1);
        Eigen::Map<Mat>(dy.data(), m, m) = 0.5 * (dS + dS.transpose());
        dy(m * m) = S.trace();
    };

    Vec y0(m * m + 1);
    Eigen::Map<Mat>(y0.data(), m, m) = sym_part(S0);
    y0(m * m) = 0.0;

    OdeOptions opt;
    opt.tol = tol;
    opt.guard = [m, unpack](double, const Vec& y) -> std::string {
        double nrm = unpack(y).norm();
        if (nrm > kBlowupThreshold)
            return "integrate_riccati: ||S|| blow-up (focal point or invalid input)";
        return {};
    };

    auto ys = integrate_on_grid(rhs, y0, grid, opt);

    ShapePath path;
    path.n = profile.n;
    path.S0_norm = sym_op_norm(S0);
    path.r.assign(grid.begin(), grid.end());
    path.S.reserve(ys.size());
    path.log_lambda.reserve(ys.size());
    for (const auto& y : ys) {
        path.S.push_back(sym_part(unpack(y)));
        path.log_lambda.push_back(y(m * m));
    }
    return path;
}

Vec JacobiPath::ambient(size_t k) const {
    const int m = 2 * n + 1;
    Vec y = Vec::Zero(m + 1);
    double rr = r[k];
    y(1) = comp(0, k) * std::exp(rr);
    double w = std::exp(0.5 * rr);
    for (int j = 1; j < m; ++j) y(j + 1) = comp(j, k) * w;
    return y;
}

Vec JacobiPath::ambient_derivative(size_t k) const {
    const int m = 2 * n + 1;
    Vec y = Vec::Zero(m + 1);
    double rr = r[k];
    y(1) = (dcomp(0, k) + comp(0, k)) * std::exp(rr);
    double w = std::exp(0.5 * rr);
    for (int j = 1; j < m; ++j) y(j + 1) = (dcomp(j, k) + 0.5 * comp(j, k)) * w;
    return y;
}

void jacobi_initial_data(const Vec& v, const Mat& S0, Vec& eta0, Vec& deta0) {
    const int m = static_cast<int>(v.size());
    if (S0.rows() != m) throw std::invalid_argument("jacobi_initial_data: dimension mismatch");
    Vec sv = S0 * v;
    eta0 = v;
    deta0.resize(m);
    deta0(0) = sv(0) - v(0);
    for (int k = 1; k < m; ++k) deta0(k) = sv(k) - 0.5 * v(k);
}

JacobiPath integrate_jacobi(const Vec& v, const Mat& S0, const CurvatureProfile& profile,
                            std::span<const double> grid, double tol) {
    const int m = 2 * profile.n + 1;
    if (v.size() != m) throw std::invalid_argument("integrate_jacobi: v has wrong dimension");

    OdeRhs rhs = [&profile, m](double r, const Vec& y, Vec& dy) {
        dy.resize(2 * m);
        for (int i = 0; i < m; ++i) dy(i) = y(m + i);
        for (int i = 0; i < m; ++i) {
            double src = 0.0;
            for (int k = 0; k < m; ++k) src += profile.u(i, k, r) * y(k);
            double damping = (i == 0) ? 2.0 : 1.0;
            dy(m + i) = -damping * y(m + i) + src;
        }
    };

    Vec eta0, deta0;
    jacobi_initial_data(v, S0, eta0, deta0);
    Vec y0(2 * m);
    y0.head(m) = eta0;
    y0.tail(m) = deta0;

    OdeOptions opt;
    opt.tol = tol;
    auto ys = integrate_on_grid(rhs, y0, grid, opt);

    JacobiPath path;
    path.n = profile.n;
    path.v = v;
    path.r.assign(grid.begin(), grid.end());
    path.comp.resize(m, static_cast<int>(grid.size()));
    path.dcomp.resize(m, static_cast<int>(grid.size()));
    for (size_t k = 0; k < ys.size(); ++k) {
        path.comp.col(k) = ys[k].head(m);
        path.dcomp.col(k) = ys[k].tail(m);
    }
    return path;
}

namespace {

// One Picard solve on a fixed uniform grid with 2K panels (2K+1 nodes).
// Prefix integrals with kernels e^{-lam (r-s)} are accumulated pairwise by
// local Simpson with telescoped exponential weights, so no large
// exponentials ever appear.
struct DuhamelSolve {
    std::vector<double> r;  // even nodes, K+1 of them
    Mat comp, dcomp;
};

DuhamelSolve duhamel_fixed(const Vec& eta0, const Vec& deta0, const CurvatureProfile& profile,
                           double r_max, int K, double sweep_tol, int max_sweeps) {
    const int m = static_cast<int>(eta0.size());
    const int nodes = 2 * K + 1;
    const double delta = r_max / (2 * K);  // node spacing

    std::vector<double> rs(nodes);
    for (int i = 0; i < nodes; ++i) rs[i] = i * delta;

    // u(i,k) sampled once per node.
    std::vector<Mat> U(nodes, Mat(m, m));
    for (int s = 0; s < nodes; ++s)
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k) U[s](i, k) = profile.u(i, k, rs[s]);

    // Homogeneous part at every node.
    Mat eta(m, nodes);
    for (int s = 0; s < nodes; ++s) {
        double rr = rs[s];
        eta(0, s) = eta0(0) + deta0(0) * 0.5 * (1.0 - std::exp(-2.0 * rr));
        for (int i = 1; i < m; ++i) eta(i, s) = eta0(i) + deta0(i) * (1.0 - std::exp(-rr));
    }
    Mat base = eta;

    Mat q(m, nodes);
    Mat next(m, nodes);
    // Per-component kernel decay: 2 for the contact component, 1 otherwise.
    auto lam_of = [](int i) { return i == 0 ? 2.0 : 1.0; };

    double change = 0.0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        for (int s = 0; s < nodes; ++s) q.col(s) = U[s] * eta.col(s);

        for (int i = 0; i < m; ++i) {
            const double lam = lam_of(i);
            const double scale = (i == 0) ? 0.5 : 1.0;
            const double w2 = std::exp(-lam * 2.0 * delta);
            const double w1 = std::exp(-lam * delta);
            double plain = 0.0;  // int_0^r q
            double damped = 0.0; // int_0^r e^{-lam (r-s)} q
            next(i, 0) = base(i, 0);
            for (int pnl = 0; pnl < K; ++pnl) {
                int s0 = 2 * pnl;
                double q0 = q(i, s0), q1 = q(i, s0 + 1), q2 = q(i, s0 + 2);
                // Odd node: local trapezoid on the half panel. Its error
                // feeds back only through u-weighted integrals, below the
                // Simpson error of the even nodes.
                double plain_o = plain + 0.5 * delta * (q0 + q1);
                double damped_o = w1 * damped + 0.5 * delta * (w1 * q0 + q1);
                next(i, s0 + 1) = base(i, s0 + 1) + scale * (plain_o - damped_o);
                plain += (delta / 3.0) * (q0 + 4.0 * q1 + q2);
                damped = w2 * damped + (delta / 3.0) * (w2 * q0 + 4.0 * w1 * q1 + q2);
                next(i, s0 + 2) = base(i, s0 + 2) + scale * (plain - damped);
            }
        }
        change = (next - eta).cwiseAbs().maxCoeff();
        eta = next;
        if (change < sweep_tol) break;
    }
    if (change >= sweep_tol)
        throw OdeError("integrate_jacobi_duhamel: Picard iteration did not converge", r_max);

    // Final derivative pass: eta'(r) = deta0 e^{-lam r} + int e^{-lam(r-s)} q.
    for (int s = 0; s < nodes; ++s) q.col(s) = U[s] * eta.col(s);
    Mat deta(m, K + 1);
    for (int i = 0; i < m; ++i) {
        const double lam = lam_of(i);
        const double w2 = std::exp(-lam * 2.0 * delta);
        const double w1 = std::exp(-lam * delta);
        double damped = 0.0;
        deta(i, 0) = deta0(i);
        for (int pnl = 0; pnl < K; ++pnl) {
            int s0 = 2 * pnl;
            damped = w2 * damped +
                     (delta / 3.0) * (w2 * q(i, s0) + 4.0 * w1 * q(i, s0 + 1) + q(i, s0 + 2));
            deta(i, pnl + 1) = deta0(i) * std::exp(-lam * rs[s0 + 2]) + damped;
        }
    }

    DuhamelSolve out;
    out.r.resize(K + 1);
    out.comp.resize(m, K + 1);
    out.dcomp = deta;
    for (int k = 0; k <= K; ++k) {
        out.r[k] = rs[2 * k];
        out.comp.col(k) = eta.col(2 * k);
    }
    return out;
}

}  // namespace

JacobiPath integrate_jacobi_duhamel(const Vec& v, const Mat& S0,
                                    const CurvatureProfile& profile, double r_max,
                                    double quad_tol, int base_points) {
    const int m = 2 * profile.n + 1;
    if (v.size() != m)
        throw std::invalid_argument("integrate_jacobi_duhamel: v has wrong dimension");

    Vec eta0, deta0;
    jacobi_initial_data(v, S0, eta0, deta0);

    int K = std::max(base_points / 2, 128);
    const double sweep_tol = 0.1 * quad_tol;
    DuhamelSolve coarse = duhamel_fixed(eta0, deta0, profile, r_max, K, sweep_tol, 80);
    for (int attempt = 0; attempt < 3; ++attempt) {
        DuhamelSolve fine = duhamel_fixed(eta0, deta0, profile, r_max, 2 * K, sweep_tol, 80);
        double diff = 0.0;
        for (int k = 0; k <= K; ++k)
            diff = std::max(diff, (fine.comp.col(2 * k) - coarse.comp.col(k)).cwiseAbs().maxCoeff());
        coarse = std::move(fine);
        K *= 2;
        if (diff < quad_tol) break;
        if (attempt == 2)
            throw OdeError("integrate_jacobi_duhamel: quadrature refinement stalled", r_max);
    }

    JacobiPath path;
    path.n = profile.n;
    path.v = v;
    path.r = coarse.r;
    path.comp = coarse.comp;
    path.dcomp = coarse.dcomp;
    return path;
}

VolumePath integrate_volume(const ShapePath& shape) {
    VolumePath vp;
    vp.r = shape.r;
    size_t npts = shape.size();
    vp.log_lambda.resize(npts);
    vp.lambda.resize(npts);
    bool have_accumulated = !shape.log_lambda.empty();
    if (have_accumulated) {
        vp.log_lambda = shape.log_lambda;
    } else {
        // Fallback for hand-built paths: Simpson on consecutive triples.
        vp.log_lambda[0] = 0.0;
        double acc = 0.0;
        for (size_t i = 1; i < npts; ++i) {
            double h = shape.r[i] - shape.r[i - 1];
            acc += 0.5 * h * (shape.S[i - 1].trace() + shape.S[i].trace());
            vp.log_lambda[i] = acc;
        }
    }
    for (size_t i = 0; i < npts; ++i) vp.lambda[i] = std::exp(vp.log_lambda[i]);
    return vp;
}

ScalarLimitPath integrate_scalar_limits(ScalarKind kind, double f0, double df0,
                                        const std::function<double(double)>& source,
                                        double source_coef, double min_order,
                                        std::span<const double> grid, double tol) {
    if (!source) throw std::invalid_argument("integrate_scalar_limits: source required");
    const double mu = (kind == ScalarKind::f) ? 1.0 : 0.5;
    const double r_max = grid.back();

    // Envelope precheck on the source.
    for (double r : grid) {
        double env = source_coef * std::exp((2.0 - min_order) * r);
        if (std::abs(source(r)) > env * (1.0 + 1e-9) + 1e-300)
            throw std::invalid_argument(
                "integrate_scalar_limits: source violates its decay envelope");
    }

    // State: [f, f', I] with I = int_0^r e^{-mu s} h(s) ds.
    OdeRhs rhs = [&source, mu](double r, const Vec& y, Vec& dy) {
        dy.resize(3);
        double h = source(r);
        dy(0) = y(1);
        dy(1) = mu * mu * y(0) + h;
        dy(2) = std::exp(-mu * r) * h;
    };
    Vec y0(3);
    y0 << f0, df0, 0.0;
    OdeOptions opt;
    opt.tol = tol;
    // e^{(2-m)r} sources can grow; keep steps modest.
    opt.h_max = 0.25;
    auto ys = integrate_on_grid(rhs, y0, grid, opt);

    double integral = ys.back()(2);
    double alpha = (kind == ScalarKind::f) ? 0.5 * (f0 + df0 + integral)
                                           : 0.5 * f0 + df0 + integral;
    // Tail of the truncated improper integral under the declared envelope.
    double decay = min_order - (2.0 - mu);  // = mu - (2 - min_order)
    double tail = (decay > 0.0)
                      ? source_coef * std::exp(-decay * r_max) / decay
                      : std::numeric_limits<double>::infinity();

    ScalarLimitPath out;
    out.kind = kind;
    out.r.assign(grid.begin(), grid.end());
    out.alpha = alpha;
    out.alpha_tail_bound = tail;
    out.f.resize(grid.size());
    out.df.resize(grid.size());
    out.source.resize(grid.size());
    out.residual.resize(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        out.f[i] = ys[i](0);
        out.df[i] = ys[i](1);
        out.source[i] = source(grid[i]);
        out.residual[i] = std::abs(out.f[i] - alpha * std::exp(mu * grid[i]));
    }
    return out;
}

}  // namespace alch
