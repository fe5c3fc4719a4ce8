#pragma once

#include <Eigen/Dense>
#include <vector>

namespace alch {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline Mat sym_part(const Mat& m) { return 0.5 * (m + m.transpose()); }

/// Operator (spectral) norm of a symmetric matrix.
inline double sym_op_norm(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline double min_eigenvalue(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline double max_eigenvalue(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

/// Spectral norm of a general (possibly non-symmetric) matrix.
inline double op_norm(const Mat& m) {
    return m.jacobiSvd().singularValues().maxCoeff();
}

struct RankInfo {
    int rank = 0;
    double cond = 0.0;   // sigma_max / sigma_min
    double sigma_min = 0.0;
};

inline RankInfo rank_and_cond(const Mat& m, double rel_tol = 1e-10) {
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& s = svd.singularValues();
    RankInfo info;
    info.sigma_min = s(s.size() - 1);
    double cutoff = rel_tol * s(0);
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > cutoff) ++info.rank;
    info.cond = (info.sigma_min > 0.0) ? s(0) / info.sigma_min
                                       : std::numeric_limits<double>::infinity();
    return info;
}

/// Gram-Schmidt on the columns of `cols`; zero-norm columns are dropped.
inline std::vector<Vec> gram_schmidt(const std::vector<Vec>& cols, double tol = 1e-12) {
    std::vector<Vec> out;
    for (const auto& c : cols) {
        Vec w = c;
        for (const auto& q : out) w -= q.dot(w) * q;
        double nrm = w.norm();
        if (nrm > tol) out.push_back(w / nrm);
    }
    return out;
}

/// Symmetric square root (and inverse square root) of an SPD matrix.
inline void spd_sqrt(const Mat& g, Mat& g_half, Mat& g_half_inv) {
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    Vec lam = es.eigenvalues();
    Mat q = es.eigenvectors();
    Vec rt = lam.cwiseMax(0.0).cwiseSqrt();
    g_half = q * rt.asDiagonal() * q.transpose();
    Vec inv = rt.unaryExpr([](double x) { return x > 0.0 ? 1.0 / x : 0.0; });
    g_half_inv = q * inv.asDiagonal() * q.transpose();
}

}  // namespace alch
