#pragma once

#include "flag/types.hpp"

#include <cmath>

namespace flag {

/// log(1 + e^t) without overflow.
inline double softplus(double t) {
    return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

inline double logistic(double t) {
    if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

/// P(X_j = 1 | X_{-j} = x_{-j}) = logistic(m_jj / 2 + sum_{i != j} m_ij x_i).
/// The value of x_j itself is ignored.
double conditional_prob(const CombinedMatrix& m, const Eigen::Ref<const Vector>& x, Index j);

/// sum_i sum_j log P(X_j = x_ij | x_i,-j).
double log_pseudo_likelihood(const CombinedMatrix& m, const BinaryDataset& data);
double log_pseudo_likelihood(const FlagParams& params, const BinaryDataset& data);

// The smooth part of the objective is evaluated column-wise: the conditional of
// item j reads only column j of M, so it is well defined for asymmetric M (the
// ADMM x-block) and agrees with the symmetric definition whenever M = M^T.

/// N x J linear predictors: eta(n, j) = m_jj / 2 + sum_{i != j} x_ni m_ij.
Matrix linear_predictors(const Matrix& m, const BinaryDataset& data);

/// h_N(M) = -(1/N) log pseudo-likelihood, column-wise.
double smooth_loss(const Matrix& m, const BinaryDataset& data);

/// Gradient of smooth_loss with respect to every entry of an unconstrained M.
Matrix smooth_loss_gradient(const Matrix& m, const BinaryDataset& data);

/// Gradient of h_N over symmetric M, with m_ij and m_ji tied into one
/// parameter: off-diagonal entries collect both conditionals that contain
/// m_ij; the diagonal carries the 1/2 factor of m_jj / 2.
Matrix grad_h(const CombinedMatrix& m, const BinaryDataset& data);

/// Loss of a single item's conditional as a function of column j of M,
/// -(1/N) sum_n log P(X_nj = x_nj | x_n,-j). Returns the value and writes the
/// gradient when `grad` is non-null.
double column_loss(const BinaryDataset& data, Index j, const Eigen::Ref<const Vector>& col, Vector* grad);

}  // namespace flag
