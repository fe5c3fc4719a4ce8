#include "alch/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace alch {

void parallel_for(int count, int jobs, const std::function<void(int)>& task) {
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(error_mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

namespace {

CheckEntry entry(std::string name, std::string statement, bool pass, double margin,
                 std::string note = {}) {
    CheckEntry e;
    e.name = std::move(name);
    e.statement = std::move(statement);
    e.pass = pass;
    e.margin = margin;
    e.note = std::move(note);
    return e;
}

/// Compares a fitted exponent against a regime expectation. Floored series
/// pass as "exact"; invalid fits fail as unconverged. One-sided regimes
/// assert the guaranteed bound only (observed decay may be faster).
CheckEntry fit_entry(std::string name, std::string statement, const DecayFit& fit,
                     const RegimeExpectation& exp, bool upper_bound_on_growth = false) {
    CheckEntry e;
    e.name = std::move(name);
    e.statement = std::move(statement);
    e.expected = exp.exponent;
    if (fit.floored) {
        e.pass = true;
        e.note = "exact (series at round-off floor)";
        e.margin = kExponentTol;
        return e;
    }
    if (!fit.valid) {
        e.pass = false;
        e.note = "unconverged (no usable fit window)";
        return e;
    }
    e.fitted = fit.exponent;
    if (fit.r2 < 0.99 && exp.two_sided) {
        e.pass = false;
        e.note = "unconverged (fit R^2 < 0.99)";
        return e;
    }
    if (exp.two_sided) {
        double diff = std::abs(fit.exponent - exp.exponent);
        e.pass = diff <= kExponentTol;
        e.margin = kExponentTol - diff;
    } else if (upper_bound_on_growth) {
        // growth must not exceed the guaranteed exponent
        double growth = -fit.exponent;
        e.pass = growth <= exp.exponent + kExponentTol;
        e.margin = exp.exponent + kExponentTol - growth;
        e.note = "one-sided bound";
    } else {
        e.pass = fit.exponent >= exp.exponent - kExponentTol;
        e.margin = fit.exponent - exp.exponent + kExponentTol;
        e.note = "one-sided bound";
    }
    return e;
}

RegimeExpectation yz_regime(double a) {
    if (a < 1.5) return {a - 1.0, true};
    if (a == 1.5) return {0.5, false};
    return {0.5, true};
}

}  // namespace

ScenarioResult run_scenario_pipeline(const Scenario& sc, int jobs) {
    ScenarioResult res;
    res.scenario = sc;
    res.profile = sc.make_profile();
    res.frame = JFrame::standard(sc.n);
    res.grid = log_grid(sc.r_max, sc.grid_points);

    Mat S0 = sc.initial_shape_operator();
    res.shape = integrate_riccati(S0, res.profile, res.grid, sc.tol);
    res.volume = integrate_volume(res.shape);

    Mat basis = sc.initial_basis();
    const int m = 2 * sc.n + 1;
    res.paths.resize(m);
    std::vector<double> duhamel_diffs(m, 0.0);

    parallel_for(m, jobs, [&](int j) {
        Vec v = basis.col(j);
        res.paths[j] = integrate_jacobi(v, S0, res.profile, res.grid, sc.tol);
        // Mutual oracle: Picard solution of the integral system vs the
        // direct integration, compared on the Picard grid.
        JacobiPath duh = integrate_jacobi_duhamel(v, S0, res.profile, sc.r_max, 1e-9);
        JacobiPath direct = integrate_jacobi(v, S0, res.profile, duh.r, sc.tol);
        duhamel_diffs[j] = (duh.comp - direct.comp).cwiseAbs().maxCoeff();
    });
    for (double d : duhamel_diffs) res.duhamel_sup_diff = std::max(res.duhamel_sup_diff, d);

    if (sc.extract) {
        res.boundary = extract_boundary_data(res.frame, res.shape, res.paths);
        if (res.boundary->rank.rank == m) {
            Vec h_vec = basis * res.boundary->dual.col(1);
            h_vec /= h_vec.norm();
            res.contact_kernel_path = integrate_jacobi(h_vec, S0, res.profile, res.grid, sc.tol);
            std::vector<double> ynorm(res.grid.size());
            for (size_t k = 0; k < res.grid.size(); ++k)
                ynorm[k] = res.contact_kernel_path->norm(k);
            res.contact_kernel_growth =
                fit_decay(res.grid, ynorm, 0.5 * sc.r_max, sc.r_max, 1.0);
        }
    }

    // Scalar limit demos driven by the profile's envelope-level sources.
    double mo = res.profile.min_order();
    if (res.profile.h && res.profile.source_coef > 0.0 && mo > 1.0) {
        res.scalar_f = integrate_scalar_limits(ScalarKind::f, 1.0, 0.5, res.profile.h,
                                               res.profile.source_coef, mo, res.grid, sc.tol);
    }
    if (res.profile.hj && res.profile.source_coef > 0.0 && mo > 1.5) {
        res.scalar_fj = integrate_scalar_limits(ScalarKind::fj, 1.0, 0.5, res.profile.hj,
                                                res.profile.source_coef, mo, res.grid, sc.tol);
    }

    build_verification(res);
    return res;
}

VerificationReport build_verification(ScenarioResult& res) {
    const Scenario& sc = res.scenario;
    const int m = 2 * sc.n + 1;
    VerificationReport rep;
    auto& E = rep.entries;
    const double minab = std::min(sc.a, sc.b);
    const bool model = sc.kind == ScenarioKind::Model;
    const double wlo = 0.5 * sc.r_max, whi = sc.r_max;

    // --- input envelope ------------------------------------------------
    {
        double viol = envelope_violation(res.profile, res.grid, sc.a, sc.c0_check_override);
        bool ok = model ? (viol <= 0.0) : (viol < 0.0);
        E.push_back(entry("profile_envelope",
                          "curvature coefficients inside the declared decay envelopes",
                          ok, -viol));
    }

    // --- Riccati health -------------------------------------------------
    {
        double drift = 0.0, floor_eig = 0.0;
        for (const auto& s : res.shape.S) {
            drift = std::max(drift, (s - s.transpose()).cwiseAbs().maxCoeff());
            floor_eig = std::min(floor_eig, min_eigenvalue(s));
        }
        E.push_back(entry("riccati_symmetry", "shape operator symmetry drift <= 10 tol",
                          drift <= 10.0 * sc.tol, 10.0 * sc.tol - drift));
        E.push_back(entry("riccati_psd", "shape operator eigenvalue floor >= -10 tol",
                          floor_eig >= -10.0 * sc.tol, floor_eig + 10.0 * sc.tol));
    }

    // --- shape norm envelope ---------------------------------------------
    {
        auto env = shape_norm_envelope(std::isfinite(sc.a) ? sc.a : 3.0,
                                       sc.C0, res.shape.S0_norm);
        std::vector<double> norms(res.shape.size());
        for (size_t k = 0; k < res.shape.size(); ++k) norms[k] = sym_op_norm(res.shape.S[k]);
        double margin = env.margin(res.shape.r, norms);
        E.push_back(entry(env.name, env.statement, margin >= 0.0, margin));
    }

    // --- volume: trace lower bound, growth bounds -----------------------
    {
        auto ve = volume_envelopes(sc.n, sc.a, sc.C0, sc.epsilon, res.volume.r,
                                   res.volume.lambda);
        std::vector<double> traces(res.shape.size());
        for (size_t k = 0; k < res.shape.size(); ++k) traces[k] = res.shape.S[k].trace();
        double tmargin = ve.trace_lower.margin(res.shape.r, traces);
        E.push_back(entry(ve.trace_lower.name, ve.trace_lower.statement, tmargin >= 0.0,
                          tmargin));
        double vmargin = ve.lower.margin(res.volume.r, res.volume.lambda);
        E.push_back(entry(ve.lower.name, ve.lower.statement, vmargin >= 0.0, vmargin));

        // Hadamard product bound from the actual Jacobi paths.
        double det_v = std::abs(sc.initial_basis().determinant());
        double worst = std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < res.grid.size(); ++k) {
            double prod = 1.0;
            for (const auto& p : res.paths) prod *= p.norm(k);
            double bound = prod / det_v;
            worst = std::min(worst, (bound - res.volume.lambda[k]) /
                                        std::max({bound, res.volume.lambda[k], 1e-12}));
        }
        E.push_back(entry("volume_hadamard",
                          "volume density <= product of Jacobi norms / |det basis|",
                          worst >= -1e-12, worst));
    }

    // --- Gronwall component bound ----------------------------------------
    {
        auto cum = u_max_cumulative(res.profile, res.grid);
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& p : res.paths) {
            double pref = (m * res.shape.S0_norm + sc.n + 1) * p.v.norm();
            for (size_t k = 0; k < res.grid.size(); ++k) {
                double sum = p.comp.col(k).cwiseAbs().sum();
                double bound = pref * std::exp(m * cum[k]);
                worst = std::min(worst, (bound - sum) / bound);
            }
        }
        E.push_back(entry("gronwall_components",
                          "sum |eta^i(r)| within the integral-system growth bound",
                          worst >= 0.0, worst));
    }

    // --- mutual oracle ---------------------------------------------------
    E.push_back(entry("duhamel_agreement",
                      "direct and integral-system solutions agree to 1e-7",
                      res.duhamel_sup_diff <= 1e-7, 1e-7 - res.duhamel_sup_diff));

    // --- Jacobi growth sandwich -------------------------------------------
    {
        double min_lower = std::numeric_limits<double>::infinity();
        for (const auto& p : res.paths) {
            for (size_t k = 0; k < res.grid.size(); ++k) {
                double ratio = p.norm(k) * std::exp(-0.5 * res.grid[k]) / p.v.norm();
                min_lower = std::min(min_lower, ratio);
            }
        }
        CheckEntry e = entry("jacobi_sandwich_lower",
                             "||Y_v|| e^{-r/2} bounded away from zero",
                             min_lower > 0.05, min_lower - 0.05);
        e.fitted = min_lower;
        e.applicable = sc.a > 1.0;
        if (!e.applicable) e.note = "no theorem at this decay order";
        E.push_back(e);

        for (size_t j = 0; j < res.paths.size(); ++j) {
            std::vector<double> ynorm(res.grid.size());
            for (size_t k = 0; k < res.grid.size(); ++k) ynorm[k] = res.paths[j].norm(k);
            DecayFit f = fit_decay(res.grid, ynorm, wlo, whi, 1.0);
            double growth = f.valid && !f.floored ? -f.exponent : 0.0;
            bool ok = growth <= 1.0 + kExponentTol && growth >= 0.5 - kExponentTol;
            CheckEntry e2 = entry("jacobi_sandwich_growth_path" + std::to_string(j),
                                  "||Y_v|| grows between e^{r/2} and e^r order", ok,
                                  std::min(1.0 + kExponentTol - growth,
                                           growth - 0.5 + kExponentTol));
            e2.fitted = growth;
            E.push_back(e2);
        }
        if (res.contact_kernel_growth) {
            double growth = -res.contact_kernel_growth->exponent;
            CheckEntry e3 = entry("jacobi_sandwich_contact_kernel",
                                  "||Y_v|| for eta(v) = 0 grows at e^{r/2} order",
                                  std::abs(growth - 0.5) <= kExponentTol,
                                  kExponentTol - std::abs(growth - 0.5));
            e3.fitted = growth;
            e3.expected = 0.5;
            e3.applicable = sc.a > 1.0;
            E.push_back(e3);
        }
    }

    if (res.boundary) {
        const BoundaryData& bd = *res.boundary;
        const double extract_tol = 1e-3;

        // convergence regimes of the component limits
        {
            CheckEntry e = fit_entry("eta_convergence_rate",
                                     "|eta_r - eta| decays at the guaranteed rate",
                                     bd.coframe.eta_decay, eta_regime(sc.a));
            e.applicable = !model || true;  // always informative
            E.push_back(e);
            E.push_back(fit_entry("etaj_convergence_rate",
                                  "|eta^j_r - eta^j| decays at the guaranteed rate",
                                  bd.coframe.etaj_decay, etaj_regime(sc.a)));
        }

        // Y - Z decay regime (worst fitted exponent across basis paths)
        {
            RegimeExpectation exp = yz_regime(sc.a);
            for (size_t j = 0; j < bd.yz.size(); ++j) {
                CheckEntry e = fit_entry("asymptotic_vector_path" + std::to_string(j),
                                         "||Y_v - Z_v|| decays at the guaranteed rate",
                                         bd.yz[j].y_fit, exp);
                E.push_back(e);
            }
        }

        // coframe rank / contact volume
        {
            CheckEntry e = entry("coframe_rank", "limit covectors form a coframe",
                                 bd.rank.rank == m, bd.rank.sigma_min);
            e.fitted = static_cast<double>(bd.rank.rank);
            e.expected = static_cast<double>(m);
            e.note = "condition " + std::to_string(bd.rank.cond);
            e.applicable = sc.a > 1.0;
            if (!e.applicable) e.note += "; no theorem at this decay order";
            E.push_back(e);

            CheckEntry cv = entry("contact_volume", "n! det(coframe) bounded away from zero",
                                  std::abs(bd.contact_volume) > 1e-2,
                                  std::abs(bd.contact_volume) - 1e-2);
            cv.fitted = bd.contact_volume;
            cv.applicable = minab > 1.0;
            E.push_back(cv);
        }

        // dual frame / phi algebra
        {
            Mat id = Mat::Identity(m, m);
            double dual_err = (bd.coframe.C * bd.dual - id).cwiseAbs().maxCoeff();
            E.push_back(entry("dual_frame", "eta^i(xi_j) = delta^i_j to 1e-10",
                              dual_err <= 1e-10, 1e-10 - dual_err));

            Mat phi2 = bd.phi * bd.phi + id - bd.xi * bd.coframe.C.row(0);
            double phi2_err = phi2.cwiseAbs().maxCoeff();
            double phixi = (bd.phi * bd.xi).norm();
            double etaphi = (bd.coframe.C.row(0) * bd.phi).norm();
            Mat phi3 = bd.phi * bd.phi * bd.phi + bd.phi;
            double phi3_err = phi3.cwiseAbs().maxCoeff();
            double worst = std::max({phi2_err, phixi, etaphi, phi3_err});
            CheckEntry e = entry("phi_algebra",
                                 "phi^2 = -Id + eta (x) xi, phi xi = 0, eta o phi = 0",
                                 worst <= 1e-10, 1e-10 - worst);
            e.applicable = sc.a > 1.0;
            E.push_back(e);
        }

        // gamma_H: PSD, kernel, positive definite on H, Levi-form identity
        {
            double ker = (bd.gammaH * bd.xi).norm();
            E.push_back(entry("carnot_kernel", "gamma_H(xi, .) = 0 to 1e-10",
                              ker <= 1e-10, 1e-10 - ker));
            auto info = rank_and_cond(bd.gammaH);
            CheckEntry e = entry("carnot_rank", "rank(gamma_H) = 2n", info.rank == m - 1,
                                 0.0);
            e.fitted = info.rank;
            e.expected = m - 1;
            e.applicable = sc.a > 1.0;
            E.push_back(e);

            // restrict to the H-basis (dual columns 1..2n, orthonormalized)
            std::vector<Vec> hcols;
            for (int j = 1; j < m; ++j) hcols.push_back(bd.dual.col(j));
            auto hb = gram_schmidt(hcols);
            Mat H(m, static_cast<int>(hb.size()));
            for (size_t c = 0; c < hb.size(); ++c) H.col(c) = hb[c];
            double min_eig = min_eigenvalue(H.transpose() * bd.gammaH * H);
            CheckEntry pd = entry("carnot_positive", "gamma_H positive definite on H",
                                  min_eig > 0.0, min_eig);
            pd.fitted = min_eig;
            pd.applicable = minab > 1.5;
            E.push_back(pd);

            Mat levi = bd.deta.limit * bd.phi;
            double levi_err = (bd.gammaH - levi).cwiseAbs().maxCoeff();
            CheckEntry lv = entry("levi_form", "gamma_H = d eta(., phi .)",
                                  levi_err <= extract_tol, extract_tol - levi_err);
            lv.fitted = levi_err;
            lv.applicable = minab > 1.5;
            E.push_back(lv);
        }

        // d eta two-route consistency
        {
            CheckEntry e = entry("deta_consistency",
                                 "shape-formula limit matches the wedge closed form",
                                 bd.deta.discrepancy <= 1e-4, 1e-4 - bd.deta.discrepancy);
            e.fitted = bd.deta.discrepancy;
            e.applicable = minab > 1.0;
            E.push_back(e);
        }

        // integrability residuals
        {
            CheckEntry nj = entry("nijenhuis_residual",
                                  "N_phi = d eta (x) xi on H (tail limit)",
                                  bd.nijenhuis.residual_limit <= extract_tol,
                                  extract_tol - bd.nijenhuis.residual_limit);
            nj.fitted = bd.nijenhuis.residual_limit;
            nj.applicable = minab > 1.5;
            E.push_back(nj);

            CheckEntry oo = entry("deta_type11",
                                  "d eta(phi u, v) = -d eta(u, phi v) on H (tail limit)",
                                  bd.nijenhuis.oneone_limit <= extract_tol,
                                  extract_tol - bd.nijenhuis.oneone_limit);
            oo.fitted = bd.nijenhuis.oneone_limit;
            oo.applicable = minab > 1.5;
            E.push_back(oo);
        }

        // metric expansion regime
        {
            CheckEntry e = fit_entry("metric_expansion",
                                     "g_r remainder growth matches the expansion table",
                                     bd.expansion.fit, metric_remainder_regime(sc.a),
                                     /*upper_bound_on_growth=*/sc.a >= 1.5);
            e.applicable = sc.a > 1.0;
            E.push_back(e);
        }

        // shape operator asymptotics
        {
            RegimeExpectation one{1.0, false};
            CheckEntry e1 = fit_entry("shape_asymptotic",
                                      "||S_r - (Id + eta (x) xi)/2|| decays at rate >= 1",
                                      bd.shape_asym.s_fit, one);
            e1.applicable = minab > 1.5;
            E.push_back(e1);
            CheckEntry e2 = fit_entry("shape_phi_commutator",
                                      "||S_r phi_r - phi_r S_r|| decays at rate >= 1",
                                      bd.shape_asym.commutator_fit, one);
            e2.applicable = minab > 1.5;
            E.push_back(e2);
        }
    }

    // scalar limit machinery (when the scenario carries demo sources)
    if (res.scalar_f) {
        double mo = res.profile.min_order();
        DecayFit f = fit_decay(res.scalar_f->r, res.scalar_f->residual, wlo, whi,
                               std::abs(res.scalar_f->alpha) + 1.0);
        E.push_back(fit_entry("scalar_limit_f",
                              "|f - alpha e^r| follows the source-decay regime", f,
                              scalar_residual_regime_f(mo)));
    }
    if (res.scalar_fj) {
        double mo = res.profile.min_order();
        DecayFit f = fit_decay(res.scalar_fj->r, res.scalar_fj->residual, wlo, whi,
                               std::abs(res.scalar_fj->alpha) + 1.0);
        E.push_back(fit_entry("scalar_limit_fj",
                              "|f^j - alpha^j e^{r/2}| follows the source-decay regime", f,
                              scalar_residual_regime_fj(mo)));
    }

    res.verification = rep;
    return rep;
}

}  // namespace alch
