#pragma once

#include <stdexcept>

#include "alch/linalg.hpp"

namespace alch {

/// Orthonormal frame of R^{2n+2} adapted to the ambient complex structure.
///
/// Index layout (fixed across the whole library):
///   0          -> d_r        (radial direction)
///   1          -> J d_r
///   2k, 2k+1   -> E_{2k-1}, E_{2k}  for k = 1..n  (complex pairs)
///
/// J acts block-diagonally on consecutive pairs: J e_{2k} = e_{2k+1},
/// J e_{2k+1} = -e_{2k}. The frame is orthonormal, so the metric is the
/// standard dot product in these coordinates.
struct JFrame {
    int n = 1;

    static JFrame standard(int n) {
        if (n < 1) throw std::invalid_argument("JFrame: n must be >= 1");
        return JFrame{n};
    }

    int dim() const { return 2 * n + 2; }          // ambient
    int boundary_dim() const { return 2 * n + 1; } // {d_r}^perp

    /// Apply the complex structure J to an ambient vector.
    Vec J(const Vec& x) const {
        if (x.size() != dim()) throw std::invalid_argument("JFrame::J: dimension mismatch");
        Vec y(x.size());
        for (int k = 0; k < x.size() / 2; ++k) {
            y(2 * k)     = -x(2 * k + 1);
            y(2 * k + 1) =  x(2 * k);
        }
        return y;
    }

    /// Pairing constants omega_ij = g(E_i, J E_j) for 1-based i,j in {1..2n}.
    /// With J E_{2k-1} = E_{2k} these form the standard symplectic pattern.
    double omega(int i, int j) const {
        if (i < 1 || j < 1 || i > 2 * n || j > 2 * n)
            throw std::out_of_range("JFrame::omega: index out of range");
        if (j == i + 1 && i % 2 == 1) return -1.0;  // g(E_{2k-1}, J E_{2k}) = -1
        if (i == j + 1 && j % 2 == 1) return 1.0;
        return 0.0;
    }

    /// Ambient index of the frame vector E_j, j in {1..2n}.
    int e_index(int j) const {
        if (j < 1 || j > 2 * n) throw std::out_of_range("JFrame::e_index");
        return j + 1;
    }

    Vec basis(int ambient_index) const {
        Vec v = Vec::Zero(dim());
        v(ambient_index) = 1.0;
        return v;
    }

    /// Matrix of Phi = J - g(.,d_r) Jd_r + g(.,Jd_r) d_r restricted to
    /// {d_r}^perp, in the frame {Jd_r, E_1..E_2n}. Kills Jd_r, rotates pairs.
    Mat phi_restricted() const {
        int m = boundary_dim();
        Mat p = Mat::Zero(m, m);
        for (int k = 1; k <= n; ++k) {
            // indices 2k-1, 2k in {Jd_r,E} labelling
            p(2 * k, 2 * k - 1) = 1.0;
            p(2 * k - 1, 2 * k) = -1.0;
        }
        return p;
    }
};

}  // namespace alch
