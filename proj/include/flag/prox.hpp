#pragma once

#include "flag/types.hpp"

#include <Eigen/Eigenvalues>

#include <tuple>

namespace flag {

/// Eigenvalue thresholding: argmin_{L >= 0} t * ||L||_* + ||L - target||_F^2 / 2.
///
/// Eigenvalues are shifted down by `threshold` and clipped at zero, so the
/// output has exact zero eigenvalues in the dead zone. `rank_out`, when given,
/// receives the number of eigenvalues that survive.
template <typename Derived>
Matrix prox_nuclear_psd(const Eigen::MatrixBase<Derived>& target, double threshold, Index* rank_out = nullptr) {
    require_symmetric(target, "prox_nuclear_psd");
    const Index n = target.rows();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(target));
    const Vector shrunk = (eig.eigenvalues().array() - threshold).cwiseMax(0.0).matrix();
    Index rank = 0;
    for (Index k = 0; k < n; ++k) rank += shrunk(k) > 0.0 ? 1 : 0;
    if (rank_out != nullptr) *rank_out = rank;
    // Eigenvalues come back ascending; the surviving ones are the trailing block.
    const auto vecs = eig.eigenvectors().rightCols(rank);
    Matrix out = vecs * shrunk.tail(rank).asDiagonal() * vecs.transpose();
    return symmetrized(out);
}

/// Scalar soft threshold.
inline double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

/// Off-diagonal soft thresholding with the diagonal copied unchanged:
/// argmin_{S = S^T} t * ||O(S)||_1 + ||S - target||_F^2 / 2.
template <typename Derived>
Matrix prox_l1_offdiag(const Eigen::MatrixBase<Derived>& target, double threshold) {
    require_symmetric(target, "prox_l1_offdiag");
    const Index n = target.rows();
    Matrix out(n, n);
    for (Index j = 0; j < n; ++j) {
        out(j, j) = target(j, j);
        for (Index i = j + 1; i < n; ++i) {
            const double v = soft_threshold(0.5 * (target(i, j) + target(j, i)), threshold);
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

/// Euclidean projection of (barM, barL, barS) onto {M = M^T, M = L + S}.
///
/// For symmetric barL and barS this reduces to
///   M = (barM + barM^T + barL + barS) / 3,
///   L = 2/3 barL + (barM + barM^T) / 6 - barS / 3,
///   S = 2/3 barS + (barM + barM^T) / 6 - barL / 3.
template <typename DM, typename DL, typename DS>
std::tuple<Matrix, Matrix, Matrix> project_consistency(const Eigen::MatrixBase<DM>& bar_m,
                                                       const Eigen::MatrixBase<DL>& bar_l,
                                                       const Eigen::MatrixBase<DS>& bar_s) {
    const Index n = bar_m.rows();
    if (bar_m.cols() != n || bar_l.rows() != n || bar_l.cols() != n || bar_s.rows() != n || bar_s.cols() != n)
        throw InputError("project_consistency: shape mismatch");
    const Matrix ls = bar_l + bar_s;
    const Matrix m = (bar_m + bar_m.transpose()) / 3.0 + (ls + ls.transpose()) / 6.0;
    const Matrix half_gap = 0.5 * (m - ls);
    Matrix l = bar_l + half_gap;
    Matrix s = bar_s + half_gap;
    Matrix m_out = l + s;
    return {std::move(m_out), std::move(l), std::move(s)};
}

}  // namespace flag
