#include "alch/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace alch {

DecayFit fit_decay(std::span<const double> r, std::span<const double> value,
                   double window_lo, double window_hi, double scale_ref) {
    if (r.size() != value.size()) throw std::invalid_argument("fit_decay: size mismatch");
    if (!(window_hi > window_lo)) throw std::invalid_argument("fit_decay: degenerate window");

    DecayFit fit;
    fit.window_lo = window_lo;
    fit.window_hi = window_hi;

    const double floor = 100.0 * std::numeric_limits<double>::epsilon() *
                         std::max(scale_ref, 1e-300);

    std::vector<std::pair<double, double>> pts;  // (r, |v|) in window, above floor
    int in_window = 0;
    for (size_t i = 0; i < r.size(); ++i) {
        if (r[i] < window_lo || r[i] > window_hi) continue;
        ++in_window;
        double av = std::abs(value[i]);
        if (!std::isfinite(av)) return fit;
        if (av > floor) pts.emplace_back(r[i], av);
    }
    if (in_window < 8) throw std::invalid_argument("fit_decay: fewer than 8 samples in window");
    if (pts.size() < 8) {
        fit.floored = true;
        fit.valid = true;
        return fit;
    }

    // Envelope reduction: per-bin maximum of |v|, fitted at the arg-max.
    // Bins must span at least half an oscillation period of the series;
    // generated profiles keep frequencies >= 2.5 so a dozen bins over any
    // window of length >= 5 is enough. Pure exponentials are unaffected.
    int nbins = std::clamp(static_cast<int>(pts.size()) / 4, 8, 16);
    double span = window_hi - window_lo;
    std::vector<double> bx(nbins, 0.0), bv(nbins, 0.0);
    for (auto [x, v] : pts) {
        int b = std::min(nbins - 1, static_cast<int>((x - window_lo) / span * nbins));
        if (v > bv[b]) {
            bv[b] = v;
            bx[b] = x;
        }
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int used = 0;
    for (int b = 0; b < nbins; ++b) {
        if (bv[b] <= 0.0) continue;
        double x = bx[b], y = std::log(bv[b]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++used;
    }
    if (used < 4) {
        fit.floored = true;
        fit.valid = true;
        return fit;
    }
    double denom = used * sxx - sx * sx;
    double slope = (used * sxy - sx * sy) / denom;
    double icept = (sy - slope * sx) / used;

    double ss_res = 0, ss_tot = 0, ybar = sy / used;
    for (int b = 0; b < nbins; ++b) {
        if (bv[b] <= 0.0) continue;
        double y = std::log(bv[b]);
        double e = y - (icept + slope * bx[b]);
        ss_res += e * e;
        ss_tot += (y - ybar) * (y - ybar);
    }
    fit.exponent = -slope;
    fit.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    fit.stderr_ = (used > 2) ? std::sqrt(ss_res / (used - 2) / (sxx - sx * sx / used)) : 0.0;
    fit.used = used;
    fit.valid = true;
    return fit;
}

double BoundEnvelope::margin(std::span<const double> r, std::span<const double> v) const {
    if (r.size() != v.size()) throw std::invalid_argument("BoundEnvelope::margin: size mismatch");
    double worst = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < r.size(); ++i) {
        if (r[i] < valid_from) continue;
        double c = curve(r[i]);
        double scale = std::max({std::abs(c), std::abs(v[i]), 1e-12});
        double slack = (side == Side::Upper) ? (c - v[i]) : (v[i] - c);
        worst = std::min(worst, slack / scale);
    }
    return worst;
}

BoundEnvelope shape_norm_envelope(double a, double C0, double S0_norm) {
    if (!(a > 0.0)) throw std::invalid_argument("shape_norm_envelope: a must be positive");
    BoundEnvelope env;
    env.name = "shape_norm_upper";
    env.side = BoundEnvelope::Side::Upper;
    double Cp;
    std::function<double(double)> regime;
    if (a < 2.0) {
        Cp = C0 / (2.0 - a);
        regime = [a](double r) { return std::exp(-a * r); };
    } else if (a == 2.0) {
        Cp = C0;
        regime = [](double r) { return (r + 1.0) * std::exp(-2.0 * r); };
    } else {
        Cp = C0 / (a - 2.0);
        regime = [](double r) { return std::exp(-2.0 * r); };
    }
    double pref = S0_norm + Cp;
    env.curve = [pref, regime](double r) { return 1.0 + pref * regime(r); };
    env.constants = {{"a", a}, {"C0", C0}, {"S0_norm", S0_norm}, {"C_prime", Cp}};
    env.statement = "largest shape eigenvalue <= 1 + (||S0|| + C') * regime(r)";
    return env;
}

OdeLimitEnvelopes ode_limit_envelope(double alpha, double beta, double gamma,
                                     double f0prime) {
    if (!(alpha > 0.0) || !(beta > 0.0) || gamma < 0.0)
        throw std::invalid_argument("ode_limit_envelope: need alpha, beta > 0, gamma >= 0");
    double af = std::abs(f0prime);

    OdeLimitEnvelopes out;
    out.fprime.name = "ode_limit_fprime";
    out.fminus.name = "ode_limit_fminus";
    out.fprime.side = out.fminus.side = BoundEnvelope::Side::Upper;
    auto consts = std::map<std::string, double>{
        {"alpha", alpha}, {"beta", beta}, {"gamma", gamma}, {"f0prime", f0prime}};
    out.fprime.constants = out.fminus.constants = consts;

    if (beta == alpha) {
        out.fprime.curve = [af, gamma, alpha](double t) {
            return (af + gamma * t) * std::exp(-alpha * t);
        };
        out.fminus.curve = [af, gamma, alpha](double t) {
            return (alpha * af + gamma * (alpha * t + 1.0)) / (alpha * alpha) *
                   std::exp(-alpha * t);
        };
    } else {
        double pref = af + gamma / std::abs(beta - alpha);
        double rate = std::min(alpha, beta);
        out.fprime.curve = [pref, rate](double t) { return pref * std::exp(-rate * t); };
        double div = (beta < alpha) ? beta : alpha;
        out.fminus.curve = [pref, rate, div](double t) {
            return pref / div * std::exp(-rate * t);
        };
    }
    out.fprime.statement = "|f'(t)| stays under the comparison-ODE envelope";
    out.fminus.statement = "|f(t) - f_inf| stays under the comparison-ODE envelope";
    return out;
}

VolumeEnvelopes volume_envelopes(int n, double a, double C0, double epsilon,
                                 std::span<const double> r,
                                 std::span<const double> lambda) {
    if (!(epsilon > 0.0) || !(epsilon < n + 0.5))
        throw std::invalid_argument("volume_envelopes: epsilon out of (0, n + 1/2)");
    if (r.size() != lambda.size() || r.empty())
        throw std::invalid_argument("volume_envelopes: bad series");

    VolumeEnvelopes out;
    double kappa = 0.5 - epsilon / (2 * n + 1);
    double quarter_gap = 0.25 - kappa * kappa;
    double r0 = 1.0;
    if (C0 > 0.0 && std::isfinite(a))
        r0 = std::max(std::log(C0 / quarter_gap) / a, 1.0);
    out.kappa = kappa;
    out.r0 = r0;

    // lambda at r0 by log-linear interpolation of the computed path.
    double loglam_r0 = 0.0;
    for (size_t i = 1; i < r.size(); ++i) {
        if (r[i] >= r0) {
            double t = (r0 - r[i - 1]) / (r[i] - r[i - 1]);
            loglam_r0 = (1.0 - t) * std::log(lambda[i - 1]) + t * std::log(lambda[i]);
            break;
        }
    }
    int m = 2 * n + 1;
    double lam_minus = std::exp(loglam_r0 - m * kappa * r0) / std::pow(2.0, m);
    out.lambda_minus = lam_minus;

    double growth = n + 0.5 - epsilon;
    out.lower.name = "volume_lower";
    out.lower.side = BoundEnvelope::Side::Lower;
    out.lower.valid_from = r0;
    out.lower.curve = [lam_minus, growth](double rr) {
        return lam_minus * std::exp(growth * rr);
    };
    out.lower.constants = {{"kappa", kappa}, {"r0", r0}, {"Lambda_minus", lam_minus},
                           {"epsilon", epsilon}};
    out.lower.statement = "volume density >= Lambda_- e^{(n + 1/2 - eps) r} beyond r0";

    out.trace_lower.name = "trace_lower";
    out.trace_lower.side = BoundEnvelope::Side::Lower;
    out.trace_lower.valid_from = r0;
    out.trace_lower.curve = [m, kappa, r0](double rr) {
        return m * kappa * std::tanh(kappa * (rr - r0));
    };
    out.trace_lower.constants = {{"kappa", kappa}, {"r0", r0}};
    out.trace_lower.statement = "trace S >= (2n+1) kappa tanh(kappa (r - r0)) beyond r0";
    return out;
}

RegimeExpectation eta_regime(double a) {
    if (a < 1.5) return {a, true};
    return {1.5, false};  // guaranteed rate saturates; realized is min(a, 2)
}

RegimeExpectation etaj_regime(double a) {
    if (a < 1.5) return {a - 0.5, true};
    if (a == 1.5) return {1.0, false};  // borderline, (r+1) factor
    return {1.0, true};
}

RegimeExpectation metric_remainder_regime(double a) {
    if (a > 1.0 && a < 1.5) return {2.0 - a, true};  // growth exponent
    return {0.5, false};                             // upper bound only
}

RegimeExpectation scalar_residual_regime_f(double m) {
    if (m < 3.0) return {m - 2.0, m != 3.0};
    if (m == 3.0) return {1.0, false};
    return {1.0, true};
}

RegimeExpectation scalar_residual_regime_fj(double m) {
    if (m < 2.5) return {m - 2.0, true};
    if (m == 2.5) return {0.5, true};  // (r+1)e^{-r/2}: log bias < fit tol
    return {0.5, true};
}

}  // namespace alch
