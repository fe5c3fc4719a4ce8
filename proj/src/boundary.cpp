#include "alch/boundary.hpp"

#include <cmath>

namespace alch {

namespace {

double roundoff_floor(double scale) {
    return 100.0 * std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300);
}

CoframeEstimate estimate_component(std::span<const double> r, const Mat& comp,
                                   const Mat& dcomp, int row, double window_lo,
                                   double window_hi, double scale_ref) {
    CoframeEstimate est;
    size_t last = r.size() - 1;
    est.raw = comp(row, last);
    double dv_end = dcomp(row, last);

    std::vector<double> dabs(r.size());
    for (size_t k = 0; k < r.size(); ++k) dabs[k] = std::abs(dcomp(row, k));
    est.fit = fit_decay(r, dabs, window_lo, window_hi, scale_ref);

    double floor = roundoff_floor(scale_ref);
    if (est.fit.floored || std::abs(dv_end) < floor) {
        est.exact = true;
        est.limit = est.raw;
        est.rate = est.fit.floored ? 0.0 : est.fit.exponent;
        est.uncertainty = floor;
        est.converged = true;
        return est;
    }
    if (est.fit.valid && est.fit.r2 >= 0.99 && est.fit.exponent > 0.0) {
        est.rate = est.fit.exponent;
        double corr = dv_end / est.rate;
        est.limit = est.raw + corr;
        est.uncertainty = std::abs(corr) + floor;
        est.converged = true;
    } else {
        // Non-monotone tail: keep the raw value, flag as unconverged.
        est.limit = est.raw;
        est.rate = est.fit.exponent;
        est.uncertainty = std::abs(dv_end) + floor;
        est.converged = false;
    }
    return est;
}

}  // namespace

Coframe extract_coframe(const std::vector<JacobiPath>& paths, double window_lo,
                        double window_hi) {
    if (paths.empty()) throw std::invalid_argument("extract_coframe: no paths");
    const int m = 2 * paths[0].n + 1;
    if (static_cast<int>(paths.size()) != m)
        throw std::invalid_argument("extract_coframe: need 2n+1 basis paths");
    for (const auto& p : paths)
        if (p.r.size() != paths[0].r.size() || p.r.back() != paths[0].r.back())
            throw std::invalid_argument("extract_coframe: paths must share the grid");

    std::span<const double> r(paths[0].r);
    Coframe cf;
    cf.n = paths[0].n;
    cf.C.resize(m, m);
    cf.C_raw.resize(m, m);
    cf.comp.assign(m, std::vector<CoframeEstimate>(m));

    double scale_ref = 0.0;
    for (const auto& p : paths) scale_ref = std::max(scale_ref, p.comp.cwiseAbs().maxCoeff());

    for (int j = 0; j < m; ++j) {
        const auto& p = paths[j];
        for (int i = 0; i < m; ++i) {
            auto est = estimate_component(r, p.comp, p.dcomp, i, window_lo, window_hi,
                                          scale_ref);
            cf.C(i, j) = est.limit;
            cf.C_raw(i, j) = est.raw;
            cf.converged = cf.converged && est.converged;
            cf.comp[i][j] = std::move(est);
        }
    }

    // Aggregate convergence series for the regime fits.
    std::vector<double> eta_series(r.size(), 0.0), etaj_series(r.size(), 0.0);
    for (size_t k = 0; k < r.size(); ++k) {
        for (int j = 0; j < m; ++j) {
            eta_series[k] += std::abs(paths[j].comp(0, k) - cf.C(0, j));
            for (int i = 1; i < m; ++i)
                etaj_series[k] += std::abs(paths[j].comp(i, k) - cf.C(i, j));
        }
    }
    cf.eta_decay = fit_decay(r, eta_series, window_lo, window_hi, scale_ref);
    cf.etaj_decay = fit_decay(r, etaj_series, window_lo, window_hi, scale_ref);
    return cf;
}

RankInfo coframe_rank_check(const Coframe& cf) { return rank_and_cond(cf.C); }

Mat assemble_carnot(const Coframe& cf) {
    const int m = 2 * cf.n + 1;
    Mat g = Mat::Zero(m, m);
    for (int i = 1; i < m; ++i) g += cf.C.row(i).transpose() * cf.C.row(i);
    return g;
}

Mat dual_frame(const Coframe& cf) {
    auto info = rank_and_cond(cf.C);
    if (info.rank < cf.C.rows())
        throw std::runtime_error("dual_frame: coframe matrix is singular");
    return cf.C.inverse();
}

Mat compute_phi(const Coframe& cf, const Mat& dual) {
    const int m = 2 * cf.n + 1;
    Mat phi = Mat::Zero(m, m);
    for (int k = 1; k <= cf.n; ++k)
        phi += dual.col(2 * k) * cf.C.row(2 * k - 1) -
               dual.col(2 * k - 1) * cf.C.row(2 * k);
    return phi;
}

Mat coframe_at(const std::vector<JacobiPath>& paths, size_t k) {
    const int m = 2 * paths[0].n + 1;
    Mat c(m, m);
    for (int j = 0; j < m; ++j) c.col(j) = paths[j].comp.col(k);
    return c;
}

namespace {

Mat deta_matrix_at(const JFrame& frame, const std::vector<JacobiPath>& paths, size_t k) {
    const int m = 2 * paths[0].n + 1;
    double r = paths[0].r[k];
    std::vector<Vec> y(m), jsy(m);
    for (int j = 0; j < m; ++j) {
        y[j] = paths[j].ambient(k);
        jsy[j] = frame.J(paths[j].ambient_derivative(k));
    }
    Mat d = Mat::Zero(m, m);
    double w = std::exp(-r);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            double val = w * (y[j].dot(jsy[i]) - y[i].dot(jsy[j]));
            d(i, j) = val;
            d(j, i) = -val;
        }
    return d;
}

}  // namespace

DetaResult compute_deta(const JFrame& frame, const std::vector<JacobiPath>& paths,
                        const Coframe& cf) {
    DetaResult out;
    out.r = paths[0].r;
    out.series.reserve(out.r.size());
    for (size_t k = 0; k < out.r.size(); ++k)
        out.series.push_back(deta_matrix_at(frame, paths, k));
    out.limit = out.series.back();

    // Tail-change indicator: compare against the value ~1 unit of r earlier.
    size_t kprev = out.r.size() - 1;
    while (kprev > 0 && out.r.back() - out.r[kprev] < 1.0) --kprev;
    out.tail_change = (out.limit - out.series[kprev]).cwiseAbs().maxCoeff();

    const int m = 2 * cf.n + 1;
    out.closed = Mat::Zero(m, m);
    for (int k = 1; k <= cf.n; ++k)
        out.closed += cf.C.row(2 * k - 1).transpose() * cf.C.row(2 * k) -
                      cf.C.row(2 * k).transpose() * cf.C.row(2 * k - 1);
    out.discrepancy = (out.limit - out.closed).cwiseAbs().maxCoeff();
    return out;
}

namespace {

struct FrameAtR {
    Mat C, D, phi, S_coords;
    Vec xi;
};

FrameAtR pulled_back_tensors(const JFrame& frame, const std::vector<JacobiPath>& paths,
                             const ShapePath& shape, size_t k) {
    const int m = 2 * paths[0].n + 1;
    const int n = paths[0].n;
    double r = paths[0].r[k];
    FrameAtR f;
    f.C = coframe_at(paths, k);
    f.D = f.C.inverse();
    f.xi = f.D.col(0);
    f.phi = Mat::Zero(m, m);
    for (int p = 1; p <= n; ++p)
        f.phi += f.D.col(2 * p) * f.C.row(2 * p - 1) - f.D.col(2 * p - 1) * f.C.row(2 * p);

    // S in pulled-back coordinates: conjugate by the weighted coframe.
    Vec wdiag(m);
    wdiag(0) = std::exp(r);
    for (int i = 1; i < m; ++i) wdiag(i) = std::exp(0.5 * r);
    Mat w_inv_S_w = shape.S[k];
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) w_inv_S_w(i, j) *= wdiag(j) / wdiag(i);
    f.S_coords = f.D * w_inv_S_w * f.C;
    return f;
}

double window_max(std::span<const double> r, std::span<const double> v, double lo,
                  double hi) {
    double mx = 0.0;
    for (size_t i = 0; i < r.size(); ++i)
        if (r[i] >= lo && r[i] <= hi) mx = std::max(mx, v[i]);
    return mx;
}

}  // namespace

NijenhuisResult nijenhuis_check(const JFrame& frame, const std::vector<JacobiPath>& paths,
                                const ShapePath& shape, const Coframe& cf,
                                const DetaResult& deta, double window_lo,
                                double window_hi) {
    const int m = 2 * cf.n + 1;
    NijenhuisResult out;
    out.r = paths[0].r;

    Mat dual = dual_frame(cf);
    Mat phi_lim = compute_phi(cf, dual);
    Vec xi = dual.col(0);

    // H-basis: the dual vectors xi_1..xi_2n annihilate eta exactly;
    // orthonormalize for conditioning.
    std::vector<Vec> hcols;
    for (int j = 1; j < m; ++j) hcols.push_back(dual.col(j));
    std::vector<Vec> hbasis = gram_schmidt(hcols);
    if (static_cast<int>(hbasis.size()) != m - 1)
        throw std::runtime_error("nijenhuis_check: degenerate H-basis");

    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < m - 1; ++a)
        for (int b = a + 1; b < m - 1; ++b) pairs.emplace_back(a, b);

    size_t npts = out.r.size();
    out.residual_series.assign(npts, 0.0);
    out.oneone_series.assign(npts, 0.0);
    out.commutator_series.assign(npts, 0.0);

    // Limit values of N per pair (tail of the finite-r series).
    std::vector<Vec> n_limit(pairs.size(), Vec::Zero(m));

    for (size_t k = 0; k < npts; ++k) {
        FrameAtR f = pulled_back_tensors(frame, paths, shape, k);
        Mat com = f.phi * f.S_coords - f.S_coords * f.phi;
        const Mat& dr = deta.series[k];
        double er = std::exp(out.r[k]);
        Vec eta_r = f.C.row(0).transpose();

        out.commutator_series[k] = op_norm(com);

        for (size_t pi = 0; pi < pairs.size(); ++pi) {
            const Vec& u = hbasis[pairs[pi].first];
            const Vec& v = hbasis[pairs[pi].second];
            Vec nuv = er * eta_r.dot(v) * (com * u) - er * eta_r.dot(u) * (com * v) +
                      u.dot(dr * v) * f.xi;
            double resid = (nuv - u.dot(deta.limit * v) * xi).norm();
            out.residual_series[k] = std::max(out.residual_series[k], resid);
            if (k + 1 == npts) n_limit[pi] = nuv;

            Vec pu = f.phi * u, pv = f.phi * v;
            double oo = std::abs(pu.dot(dr * v) + u.dot(dr * pv));
            out.oneone_series[k] = std::max(out.oneone_series[k], oo);
        }
    }

    for (size_t pi = 0; pi < pairs.size(); ++pi) {
        const Vec& u = hbasis[pairs[pi].first];
        const Vec& v = hbasis[pairs[pi].second];
        double resid = (n_limit[pi] - u.dot(deta.limit * v) * xi).norm();
        out.residual_limit = std::max(out.residual_limit, resid);
        Vec pu = phi_lim * u, pv = phi_lim * v;
        double oo = std::abs(pu.dot(deta.limit * v) + u.dot(deta.limit * pv));
        out.oneone_limit = std::max(out.oneone_limit, oo);
    }

    out.residual_window = window_max(out.r, out.residual_series, window_lo, window_hi);
    out.oneone_window = window_max(out.r, out.oneone_series, window_lo, window_hi);

    double scale = 1.0;
    out.residual_fit = fit_decay(out.r, out.residual_series, window_lo, window_hi, scale);
    out.oneone_fit = fit_decay(out.r, out.oneone_series, window_lo, window_hi, scale);
    return out;
}

MetricExpansionResult metric_expansion_check(const std::vector<JacobiPath>& paths,
                                             const Coframe& cf, double window_lo,
                                             double window_hi) {
    const int m = 2 * cf.n + 1;
    MetricExpansionResult out;
    out.r = paths[0].r;
    out.remainder_norm.resize(out.r.size());

    Mat eta_outer = cf.C.row(0).transpose() * cf.C.row(0);
    Mat gammaH = assemble_carnot(cf);

    for (size_t k = 0; k < out.r.size(); ++k) {
        double r = out.r[k];
        Mat c = coframe_at(paths, k);
        Vec wdiag(m);
        wdiag(0) = std::exp(r);
        for (int i = 1; i < m; ++i) wdiag(i) = std::exp(0.5 * r);
        Mat wc = wdiag.asDiagonal() * c;
        Mat g_r = wc.transpose() * wc;
        Mat h = g_r - std::exp(2.0 * r) * eta_outer - std::exp(r) * gammaH;
        out.remainder_norm[k] = h.norm();
    }
    out.fit = fit_decay(out.r, out.remainder_norm, window_lo, window_hi, 1.0);
    return out;
}

ShapeAsymptoticsResult shape_asymptotics_check(const JFrame& frame, const ShapePath& shape,
                                               const std::vector<JacobiPath>& paths,
                                               const Coframe& cf, const Mat& dual,
                                               double window_lo, double window_hi) {
    const int m = 2 * cf.n + 1;
    ShapeAsymptoticsResult out;
    out.r = shape.r;
    out.s_residual.resize(out.r.size());
    out.commutator_residual.resize(out.r.size());

    Vec xi = dual.col(0);
    Mat T = 0.5 * (Mat::Identity(m, m) + xi * cf.C.row(0));
    Mat P = frame.phi_restricted();

    for (size_t k = 0; k < out.r.size(); ++k) {
        double r = out.r[k];
        Mat c = coframe_at(paths, k);
        Vec wdiag(m);
        wdiag(0) = std::exp(r);
        for (int i = 1; i < m; ++i) wdiag(i) = std::exp(0.5 * r);
        Mat M = wdiag.asDiagonal() * c;
        // push the comparison tensor to the parallel frame, where the metric
        // is the dot product; operator norms there equal g-norms.
        Mat T_amb = M * T * M.inverse();
        out.s_residual[k] = op_norm(shape.S[k] - T_amb);
        out.commutator_residual[k] = op_norm(shape.S[k] * P - P * shape.S[k]);
    }
    out.s_fit = fit_decay(out.r, out.s_residual, window_lo, window_hi, 1.0);
    out.commutator_fit =
        fit_decay(out.r, out.commutator_residual, window_lo, window_hi, 1.0);
    return out;
}

AsymptoticVectorsResult asymptotic_vectors_check(const JacobiPath& path, const Coframe& cf,
                                                 int path_index, double window_lo,
                                                 double window_hi) {
    const int m = 2 * path.n + 1;
    AsymptoticVectorsResult out;
    out.r = path.r;
    out.y_minus_z.resize(out.r.size());
    out.sy_minus_zp.resize(out.r.size());
    for (size_t k = 0; k < out.r.size(); ++k) {
        double r = out.r[k];
        double er = std::exp(r), eh = std::exp(0.5 * r);
        double y2 = 0.0, s2 = 0.0;
        double d0 = path.comp(0, k) - cf.C(0, path_index);
        y2 += er * er * d0 * d0;
        double sd0 = path.dcomp(0, k) + d0;
        s2 += er * er * sd0 * sd0;
        for (int i = 1; i < m; ++i) {
            double di = path.comp(i, k) - cf.C(i, path_index);
            y2 += eh * eh * di * di;
            double sdi = path.dcomp(i, k) + 0.5 * di;
            s2 += eh * eh * sdi * sdi;
        }
        out.y_minus_z[k] = std::sqrt(y2);
        out.sy_minus_zp[k] = std::sqrt(s2);
    }
    out.y_fit = fit_decay(out.r, out.y_minus_z, window_lo, window_hi, 1.0);
    out.sy_fit = fit_decay(out.r, out.sy_minus_zp, window_lo, window_hi, 1.0);
    return out;
}

BoundaryData extract_boundary_data(const JFrame& frame, const ShapePath& shape,
                                   const std::vector<JacobiPath>& paths,
                                   const ExtractionOptions& opt) {
    double r_max = paths.at(0).r.back();
    double lo = opt.window_lo, hi = opt.window_hi;
    if (hi <= lo) {
        lo = 0.5 * r_max;
        hi = r_max;
    }

    BoundaryData bd;
    bd.coframe = extract_coframe(paths, lo, hi);
    bd.rank = coframe_rank_check(bd.coframe);
    bd.gammaH = assemble_carnot(bd.coframe);
    bd.dual = dual_frame(bd.coframe);
    bd.xi = bd.dual.col(0);
    bd.phi = compute_phi(bd.coframe, bd.dual);
    bd.deta = compute_deta(frame, paths, bd.coframe);
    bd.nijenhuis = nijenhuis_check(frame, paths, shape, bd.coframe, bd.deta, lo, hi);
    bd.expansion = metric_expansion_check(paths, bd.coframe, lo, hi);
    bd.shape_asym = shape_asymptotics_check(frame, shape, paths, bd.coframe, bd.dual, lo, hi);
    for (size_t j = 0; j < paths.size(); ++j)
        bd.yz.push_back(asymptotic_vectors_check(paths[j], bd.coframe,
                                                 static_cast<int>(j), lo, hi));

    double factorial = 1.0;
    for (int k = 2; k <= bd.coframe.n; ++k) factorial *= k;
    bd.contact_volume = factorial * bd.coframe.C.determinant();
    return bd;
}

}  // namespace alch
