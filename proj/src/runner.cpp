#include "alch/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

namespace alch {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json vec_to_json(const Vec& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json fit_to_json(const DecayFit& f) {
    return json{{"exponent", f.exponent}, {"stderr", f.stderr_},   {"r2", f.r2},
                {"window_lo", f.window_lo}, {"window_hi", f.window_hi},
                {"points", f.used},       {"floored", f.floored}, {"valid", f.valid}};
}

json scenario_to_json(const Scenario& sc) {
    json j;
    switch (sc.kind) {
        case ScenarioKind::Model: j["kind"] = "model"; break;
        case ScenarioKind::Random: j["kind"] = "random"; break;
        case ScenarioKind::Warped: j["kind"] = "warped"; break;
    }
    j["n"] = sc.n;
    j["seed"] = sc.seed;
    j["a"] = sc.a;
    j["C0"] = sc.C0;
    j["b"] = sc.b;
    j["C1"] = sc.C1;
    j["r_max"] = sc.r_max;
    j["tol"] = sc.tol;
    j["grid"] = sc.grid_points;
    j["extract"] = sc.extract;
    j["epsilon"] = sc.epsilon;
    j["sphere_radius"] = sc.sphere_radius;
    if (sc.explicit_S0) j["shape_operator"] = mat_to_json(*sc.explicit_S0);
    if (sc.explicit_basis) j["basis"] = mat_to_json(*sc.explicit_basis);
    if (sc.c0_check_override) j["c0_override"] = *sc.c0_check_override;
    j["warnings"] = sc.warnings;
    return j;
}

json verification_to_json(const VerificationReport& rep) {
    json entries = json::array();
    for (const auto& e : rep.entries) {
        json je = {{"name", e.name},       {"statement", e.statement},
                   {"pass", e.pass},       {"applicable", e.applicable},
                   {"margin", e.margin},   {"note", e.note}};
        if (e.fitted) je["fitted"] = *e.fitted;
        if (e.expected) je["expected"] = *e.expected;
        entries.push_back(je);
    }
    return json{{"entries", entries},
                {"all_pass", rep.all_pass()},
                {"failures", rep.failures()}};
}

struct CsvWriter {
    std::ofstream out;
    explicit CsvWriter(const fs::path& p) : out(p) { out << "r,quantity,value\n"; }
    void row(double r, const std::string& q, double v) {
        out << format_double(r) << ',' << q << ',' << format_double(v) << '\n';
    }
};

void write_series(const ScenarioResult& res, const fs::path& dir) {
    fs::create_directories(dir);
    const auto& sc = res.scenario;
    auto wants = [&sc](const char* name) {
        return sc.series.empty() ||
               std::find(sc.series.begin(), sc.series.end(), name) != sc.series.end();
    };

    if (wants("shape")) {
        CsvWriter w(dir / "shape.csv");
        for (size_t k = 0; k < res.shape.size(); ++k) {
            double r = res.shape.r[k];
            w.row(r, "shape_norm", sym_op_norm(res.shape.S[k]));
            w.row(r, "trace_S", res.shape.S[k].trace());
            w.row(r, "min_eig", min_eigenvalue(res.shape.S[k]));
            w.row(r, "lambda", res.volume.lambda[k]);
            w.row(r, "log_lambda", res.volume.log_lambda[k]);
        }
    }
    if (wants("components")) {
        CsvWriter w(dir / "components.csv");
        const int m = 2 * res.scenario.n + 1;
        for (size_t k = 0; k < res.grid.size(); ++k) {
            double r = res.grid[k];
            for (size_t j = 0; j < res.paths.size(); ++j)
                for (int i = 0; i < m; ++i)
                    w.row(r, "eta" + std::to_string(i) + "_path" + std::to_string(j),
                          res.paths[j].comp(i, k));
        }
    }
    if (wants("extraction") && res.boundary) {
        CsvWriter w(dir / "extraction.csv");
        const auto& bd = *res.boundary;
        for (size_t k = 0; k < res.grid.size(); ++k) {
            double r = res.grid[k];
            w.row(r, "metric_remainder", bd.expansion.remainder_norm[k]);
            w.row(r, "nijenhuis_residual", bd.nijenhuis.residual_series[k]);
            w.row(r, "type11_residual", bd.nijenhuis.oneone_series[k]);
            w.row(r, "shape_phi_commutator", bd.nijenhuis.commutator_series[k]);
            w.row(r, "shape_asymptotic", bd.shape_asym.s_residual[k]);
        }
    }
    if (wants("scalar") && res.scalar_f) {
        CsvWriter w(dir / "scalar.csv");
        for (size_t k = 0; k < res.scalar_f->r.size(); ++k) {
            double r = res.scalar_f->r[k];
            w.row(r, "f", res.scalar_f->f[k]);
            w.row(r, "f_residual", res.scalar_f->residual[k]);
            if (res.scalar_fj) {
                w.row(r, "fj", res.scalar_fj->f[k]);
                w.row(r, "fj_residual", res.scalar_fj->residual[k]);
            }
        }
    }
}

json boundary_to_json(const BoundaryData& bd) {
    json j;
    j["coframe"] = mat_to_json(bd.coframe.C);
    j["coframe_raw"] = mat_to_json(bd.coframe.C_raw);
    j["rank"] = bd.rank.rank;
    j["condition"] = bd.rank.cond;
    j["contact_volume"] = bd.contact_volume;
    j["xi"] = vec_to_json(bd.xi);
    j["dual"] = mat_to_json(bd.dual);
    j["gammaH"] = mat_to_json(bd.gammaH);
    j["phi"] = mat_to_json(bd.phi);
    j["deta"] = mat_to_json(bd.deta.limit);
    j["deta_closed"] = mat_to_json(bd.deta.closed);
    j["deta_discrepancy"] = bd.deta.discrepancy;
    j["nijenhuis"] = {{"residual_limit", bd.nijenhuis.residual_limit},
                      {"residual_window", bd.nijenhuis.residual_window},
                      {"type11_limit", bd.nijenhuis.oneone_limit},
                      {"type11_window", bd.nijenhuis.oneone_window},
                      {"residual_fit", fit_to_json(bd.nijenhuis.residual_fit)},
                      {"type11_fit", fit_to_json(bd.nijenhuis.oneone_fit)}};
    j["expansion_fit"] = fit_to_json(bd.expansion.fit);
    j["shape_asymptotic_fit"] = fit_to_json(bd.shape_asym.s_fit);
    j["shape_commutator_fit"] = fit_to_json(bd.shape_asym.commutator_fit);
    j["eta_decay_fit"] = fit_to_json(bd.coframe.eta_decay);
    j["etaj_decay_fit"] = fit_to_json(bd.coframe.etaj_decay);
    return j;
}

}  // namespace

void write_outputs(const ScenarioResult& res, const std::string& out_dir,
                   double elapsed_seconds) {
    fs::path dir(out_dir);
    fs::create_directories(dir);

    json verification = verification_to_json(res.verification);
    {
        std::ofstream f(dir / "verification.json");
        f << verification.dump(2) << '\n';
    }

    json report;
    report["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    report["scenario"] = scenario_to_json(res.scenario);
    report["timing"] = {{"elapsed_seconds", elapsed_seconds}};
    report["duhamel_sup_diff"] = res.duhamel_sup_diff;
    if (res.boundary) report["boundary"] = boundary_to_json(*res.boundary);
    if (res.contact_kernel_growth)
        report["contact_kernel_growth"] = fit_to_json(*res.contact_kernel_growth);
    if (res.scalar_f)
        report["scalar_f"] = {{"alpha", res.scalar_f->alpha},
                              {"tail_bound", res.scalar_f->alpha_tail_bound}};
    if (res.scalar_fj)
        report["scalar_fj"] = {{"alpha", res.scalar_fj->alpha},
                               {"tail_bound", res.scalar_fj->alpha_tail_bound}};
    report["verification"] = verification;
    {
        std::ofstream f(dir / "report.json");
        f << report.dump(2) << '\n';
    }

    write_series(res, dir / "series");
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir, int jobs,
            const RunOverrides& overrides) {
    Scenario sc;
    try {
        sc = load_scenario(scenario_path);
        if (overrides.seed) sc.seed = *overrides.seed;
        if (overrides.r_max) sc.r_max = *overrides.r_max;
        if (overrides.tol) sc.tol = *overrides.tol;
        if (!(sc.r_max > 0.0) || !(sc.tol > 0.0))
            throw ScenarioError("overrides must keep r_max and tol positive");
    } catch (const ScenarioError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    }

    ScenarioResult res;
    auto t0 = std::chrono::steady_clock::now();
    try {
        res = run_scenario_pipeline(sc, jobs);
    } catch (const OdeError& e) {
        std::cerr << "numerical failure at r = " << e.r << ": " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const ScenarioError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_outputs(res, out_dir, elapsed);

    for (const auto& e : res.verification.entries) {
        if (!e.applicable) continue;
        std::cout << (e.pass ? "PASS " : "FAIL ") << e.name;
        if (!e.note.empty()) std::cout << "  [" << e.note << "]";
        std::cout << '\n';
    }
    bool ok = res.verification.all_pass();
    std::cout << (ok ? "verification: all checks passed\n"
                     : "verification: " + std::to_string(res.verification.failures()) +
                           " check(s) failed\n");
    return ok ? kOk : kVerificationFailure;
}

int cmd_identities(int n, int trials, std::uint64_t seed) {
    if (n < 1 || trials < 1) {
        std::cerr << "configuration error: need n >= 1 and trials >= 1\n";
        return kConfigError;
    }
    auto rep = verify_appendix_identities(n, trials, seed);
    const auto& names = IdentityReport::names();
    for (size_t i = 0; i < names.size(); ++i)
        std::printf("%-78s max residual %.3e\n", names[i], rep.max_residual[i]);
    double worst = rep.worst();
    std::printf("worst residual over %d trials (n = %d, seed = %llu): %.3e\n", trials, n,
                static_cast<unsigned long long>(seed), worst);
    bool ok = worst <= 1e-12;
    std::puts(ok ? "identities: PASS" : "identities: FAIL");
    return ok ? kOk : kVerificationFailure;
}

int cmd_sweep(const std::string& scenario_path, const std::string& param,
              const std::vector<double>& values, const std::string& out_dir, int jobs) {
    if (values.empty()) {
        std::cerr << "configuration error: empty sweep value list\n";
        return kConfigError;
    }
    if (param != "a" && param != "r_max") {
        std::cerr << "configuration error: sweep parameter must be 'a' or 'r_max'\n";
        return kConfigError;
    }
    Scenario base;
    try {
        base = load_scenario(scenario_path);
    } catch (const ScenarioError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    }

    json table = json::array();
    bool all_ok = true;
    fs::path dir(out_dir);
    fs::create_directories(dir);
    std::ofstream csv(dir / "sweep.csv");
    csv << "param,value,eta_exponent,etaj_exponent,expansion_growth,"
           "nijenhuis_window,type11_window,contact_volume,all_pass\n";

    for (double value : values) {
        Scenario sc = base;
        if (param == "a") {
            sc.a = value;
            if (!(sc.a > 0.5)) {
                std::cerr << "configuration error: sweep value a = " << value
                          << " violates a > 1/2\n";
                return kConfigError;
            }
            if (sc.kind == ScenarioKind::Model) {
                std::cerr << "configuration error: cannot sweep a on a model scenario\n";
                return kConfigError;
            }
        } else {
            sc.r_max = value;
        }

        ScenarioResult res;
        try {
            res = run_scenario_pipeline(sc, jobs);
        } catch (const OdeError& e) {
            std::cerr << "numerical failure at r = " << e.r << ": " << e.what() << '\n';
            return kNumericalFailure;
        }

        json row;
        row["param"] = param;
        row["value"] = value;
        bool pass = res.verification.all_pass();
        all_ok = all_ok && pass;
        row["all_pass"] = pass;
        double eta_e = 0, etaj_e = 0, growth = 0, nij = 0, oo = 0, cv = 0;
        if (res.boundary) {
            eta_e = res.boundary->coframe.eta_decay.exponent;
            etaj_e = res.boundary->coframe.etaj_decay.exponent;
            growth = -res.boundary->expansion.fit.exponent;
            nij = res.boundary->nijenhuis.residual_window;
            oo = res.boundary->nijenhuis.oneone_window;
            cv = res.boundary->contact_volume;
            row["eta_exponent"] = eta_e;
            row["etaj_exponent"] = etaj_e;
            row["eta_floored"] = res.boundary->coframe.eta_decay.floored;
            row["etaj_floored"] = res.boundary->coframe.etaj_decay.floored;
            row["expansion_growth"] = growth;
            row["nijenhuis_window"] = nij;
            row["type11_window"] = oo;
            row["contact_volume"] = cv;
        }
        csv << param << ',' << format_double(value) << ',' << format_double(eta_e) << ','
            << format_double(etaj_e) << ',' << format_double(growth) << ','
            << format_double(nij) << ',' << format_double(oo) << ',' << format_double(cv)
            << ',' << (pass ? 1 : 0) << '\n';
        table.push_back(row);
        std::cout << param << " = " << value << ": eta " << eta_e << ", eta^j " << etaj_e
                  << (pass ? "  [pass]" : "  [FAIL]") << '\n';
    }

    std::ofstream jf(dir / "sweep.json");
    jf << json{{"param", param}, {"rows", table}}.dump(2) << '\n';
    return all_ok ? kOk : kVerificationFailure;
}

}  // namespace alch
