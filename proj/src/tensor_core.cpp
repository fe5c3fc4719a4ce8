#include "alch/tensor_core.hpp"

#include <random>

namespace alch {

double eval_R0(const JFrame& frame, const Vec& x, const Vec& y, const Vec& z, const Vec& t) {
    const int d = frame.dim();
    if (x.size() != d || y.size() != d || z.size() != d || t.size() != d)
        throw std::invalid_argument("eval_R0: dimension mismatch");
    Vec jy = frame.J(y), jz = frame.J(z), jt = frame.J(t);
    return 0.25 * (x.dot(t) * y.dot(z) - x.dot(z) * y.dot(t)
                 + x.dot(jt) * y.dot(jz) - x.dot(jz) * y.dot(jt)
                 + 2.0 * x.dot(jy) * t.dot(jz));
}

Vec eval_Phi(const JFrame& frame, const Vec& x, const Vec& radial) {
    if (x.size() != frame.dim() || radial.size() != frame.dim())
        throw std::invalid_argument("eval_Phi: dimension mismatch");
    if (std::abs(radial.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("eval_Phi: radial vector must be unit");
    Vec jr = frame.J(radial);
    return frame.J(x) - x.dot(radial) * jr + x.dot(jr) * radial;
}

const std::array<const char*, 8>& IdentityReport::names() {
    static const std::array<const char*, 8> k = {
        "R0(dr,Jdr,Yv,SYu)   = -1/2 g(SYu,JYv)",
        "R0(dr,Yv,SYu,Jdr)   = +1/4 g(SYu,JYv)",
        "R0(dr,W,dr,Jdr)     = -g(W,Jdr)",
        "R0(dr,Yv,dr,W)      = -1/4 g(Yv,W)          [g(W,Jdr)=0]",
        "R0(dr,Ej,Yv,SYu)    = 1/4 (g(SYu,Jdr)g(Yv,JEj) - g(SYu,JEj)g(Yv,Jdr))",
        "R0(dr,Yv,SYu,Ej)    = 1/4 g(SYu,Jdr)g(Yv,JEj) + 1/2 g(SYu,JEj)g(Yv,Jdr)",
        "R0(dr,W,dr,Ej)      = -1/4 g(W,Ej)",
        "R0(dr,Yv,dr,W)      = -1/4 g(Yv,W) - 3/4 g(SYu,JEj)g(Yv,Jdr)  [g(W,Jdr)=g(SYu,JEj)]",
    };
    return k;
}

namespace {

// Gaussian vector orthogonal to d_r (component 0 zeroed).
Vec sample_normal_perp(std::mt19937_64& rng, int dim, double scale) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = scale * nd(rng);
    v(0) = 0.0;
    return v;
}

}  // namespace

IdentityReport verify_appendix_identities(int n, int trials, std::uint64_t seed, double scale) {
    if (n < 1) throw std::invalid_argument("verify_appendix_identities: n must be >= 1");
    if (trials < 1) throw std::invalid_argument("verify_appendix_identities: trials must be >= 1");

    JFrame F = JFrame::standard(n);
    const int d = F.dim();
    Vec dr = F.basis(0);
    Vec jdr = F.basis(1);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_j(1, 2 * n);

    IdentityReport rep;
    rep.n = n;
    rep.trials = trials;
    rep.seed = seed;
    rep.scale = scale;

    auto track = [&rep](int which, double lhs, double rhs) {
        rep.max_residual[which] = std::max(rep.max_residual[which], std::abs(lhs - rhs));
    };

    for (int t = 0; t < trials; ++t) {
        Vec yv = sample_normal_perp(rng, d, scale);
        Vec syu = sample_normal_perp(rng, d, scale);
        Vec jyv = F.J(yv);

        // 1, 2: complex-pair contractions against g(SYu, JYv).
        track(0, eval_R0(F, dr, jdr, yv, syu), -0.5 * syu.dot(jyv));
        track(1, eval_R0(F, dr, yv, syu, jdr), 0.25 * syu.dot(jyv));

        // 3: radial pair against the Jd_r component (placeholder W free).
        Vec w = sample_normal_perp(rng, d, scale);
        track(2, eval_R0(F, dr, w, dr, jdr), -w.dot(jdr));

        // 4: placeholder for the derivative of Jd_r, which is pointwise
        // orthogonal to Jd_r (constant norm); enforce by projection.
        Vec wa = sample_normal_perp(rng, d, scale);
        wa -= wa.dot(jdr) * jdr;
        track(3, eval_R0(F, dr, yv, dr, wa), -0.25 * yv.dot(wa));

        // 5-8 involve a transverse frame vector E_j.
        int j = pick_j(rng);
        Vec ej = F.basis(F.e_index(j));
        Vec jej = F.J(ej);
        double s_jdr = syu.dot(jdr), s_jej = syu.dot(jej);
        double v_jdr = yv.dot(jdr), v_jej = yv.dot(jej);

        track(4, eval_R0(F, dr, ej, yv, syu), 0.25 * (s_jdr * v_jej - s_jej * v_jdr));
        track(5, eval_R0(F, dr, yv, syu, ej), 0.25 * s_jdr * v_jej + 0.5 * s_jej * v_jdr);

        Vec wb = sample_normal_perp(rng, d, scale);
        track(6, eval_R0(F, dr, wb, dr, ej), -0.25 * wb.dot(ej));

        // 8: placeholder for the derivative of E_j; its Jd_r component is
        // tied to SYu by radial parallelism of the frame.
        Vec wc = sample_normal_perp(rng, d, scale);
        wc += (s_jej - wc.dot(jdr)) * jdr;
        track(7, eval_R0(F, dr, yv, dr, wc), -0.25 * yv.dot(wc) - 0.75 * s_jej * v_jdr);
    }
    return rep;
}

}  // namespace alch
