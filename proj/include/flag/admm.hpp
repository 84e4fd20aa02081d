#pragma once

#include "flag/types.hpp"

#include <optional>
#include <vector>

namespace flag {

struct SolverConfig {
    double lambda = 10.0;  ///< ADMM scale parameter
    int max_iter = 5000;
    double tol_abs = 1e-6;
    double tol_rel = 1e-5;
    double subproblem_grad_tol = 1e-8;
    int subproblem_max_iter = 200;
    bool record_trace = false;

    /// Throws InputError when a field is out of range.
    void validate() const;
};

/// Iterates of the splitting x = (M, L, S), z = (M~, L~, S~), u = (U_M, U_L, U_S).
struct SolverState {
    Matrix m, l, s;
    Matrix m_z, l_z, s_z;
    Matrix u_m, u_l, u_s;
    int iteration = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    /// Per-column BFGS inverse-Hessian approximations reused across Step 1 calls.
    std::vector<Matrix> column_curvature;

    static SolverState zeros(Index j);
    Index n_items() const { return m.rows(); }
};

struct AdmmTraceRow {
    int iteration = 0;
    double objective = 0.0;    ///< penalized objective at the x-block (L, S)
    double z_objective = 0.0;  ///< penalized objective at the z-block
    double primal_residual = 0.0;
    double dual_residual = 0.0;
};

struct RegularizedFit {
    Matrix l_hat;  ///< x-block L: PSD with exact zero eigenvalues from thresholding
    Matrix s_hat;  ///< x-block S: symmetric with exact zeros from soft thresholding
    double gamma = 0.0;
    double delta = 0.0;
    bool converged = false;
    int iterations = 0;
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int subproblem_failures = 0;
    std::vector<AdmmTraceRow> trace;
};

/// h_N(L + S) + gamma * ||O(S)||_1 + delta * ||L||_*, with the nuclear norm
/// taken as the sum of absolute eigenvalues.
double penalized_objective(const Matrix& l, const Matrix& s, const BinaryDataset& data, double gamma, double delta);

struct ProxSmoothResult {
    Matrix m;
    bool converged = true;
    int failed_columns = 0;
};

/// argmin_M h_N(M) + ||M - target||_F^2 / (2 lambda), solved column by column.
/// `start` seeds each column solve (defaults to the target); `curvature`
/// carries per-column inverse-Hessian approximations between calls.
ProxSmoothResult prox_smooth_M(const Matrix& target, const BinaryDataset& data, double lambda,
                               const SolverConfig& config = {}, const Matrix* start = nullptr,
                               std::vector<Matrix>* curvature = nullptr);

/// Regularized pseudo-likelihood fit by ADMM.
///
/// `warm_start` seeds all nine iterates; `final_state` receives them at
/// termination so the next grid point can continue from here.
RegularizedFit admm_fit(const BinaryDataset& data, double gamma, double delta, const SolverConfig& config = {},
                        const SolverState* warm_start = nullptr, SolverState* final_state = nullptr);

struct Structure {
    Index rank = 0;
    EdgeList edges;
};

/// Rank counts eigenvalues of L above 1e-8 * max(1, largest eigenvalue);
/// edges are the off-diagonal nonzeros of S.
Structure extract_structure(const RegularizedFit& fit);
Index numerical_rank(const Matrix& l);

}  // namespace flag
