#include "flag/admm.hpp"

#include "flag/bfgs.hpp"
#include "flag/core_model.hpp"
#include "flag/prox.hpp"

#include <cmath>

namespace flag {

void SolverConfig::validate() const {
    if (!(lambda > 0.0)) throw InputError("lambda must be positive");
    if (max_iter < 1) throw InputError("max_iter must be positive");
    if (!(tol_abs > 0.0) || tol_abs > 1e-2) throw InputError("tol_abs must lie in (0, 1e-2]");
    if (!(tol_rel > 0.0)) throw InputError("tol_rel must be positive");
    if (!(subproblem_grad_tol > 0.0)) throw InputError("subproblem_grad_tol must be positive");
    if (subproblem_max_iter < 1) throw InputError("subproblem_max_iter must be positive");
}

SolverState SolverState::zeros(Index j) {
    SolverState st;
    const Matrix z = Matrix::Zero(j, j);
    st.m = st.l = st.s = z;
    st.m_z = st.l_z = st.s_z = z;
    st.u_m = st.u_l = st.u_s = z;
    return st;
}

double penalized_objective(const Matrix& l, const Matrix& s, const BinaryDataset& data, double gamma,
                           double delta) {
    double off_l1 = s.cwiseAbs().sum() - s.diagonal().cwiseAbs().sum();
    double nuclear = 0.0;
    if (delta != 0.0)
        nuclear = Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(l), Eigen::EigenvaluesOnly)
                      .eigenvalues()
                      .cwiseAbs()
                      .sum();
    return smooth_loss(l + s, data) + gamma * off_l1 + delta * nuclear;
}

ProxSmoothResult prox_smooth_M(const Matrix& target, const BinaryDataset& data, double lambda,
                               const SolverConfig& config, const Matrix* start, std::vector<Matrix>* curvature) {
    const Index j_items = data.n_items();
    if (target.rows() != j_items || target.cols() != j_items)
        throw InputError("prox_smooth_M: target shape does not match data");
    if (!(lambda > 0.0)) throw InputError("prox_smooth_M: lambda must be positive");
    if (start != nullptr && (start->rows() != j_items || start->cols() != j_items))
        throw InputError("prox_smooth_M: start shape does not match data");
    if (curvature != nullptr && static_cast<Index>(curvature->size()) != j_items)
        curvature->assign(static_cast<std::size_t>(j_items), Matrix());

    const double inv_lambda = 1.0 / lambda;
    BfgsOptions opts;
    opts.grad_tol = config.subproblem_grad_tol;
    opts.max_iter = config.subproblem_max_iter;

    ProxSmoothResult out;
    out.m.resize(j_items, j_items);
    for (Index j = 0; j < j_items; ++j) {
        const Vector t = target.col(j);
        const Objective f = [&, j](const Vector& w, Vector& g) {
            const double v = column_loss(data, j, w, &g);
            const Vector d = w - t;
            g += inv_lambda * d;
            return v + 0.5 * inv_lambda * d.squaredNorm();
        };
        Vector w0 = start != nullptr ? Vector(start->col(j)) : t;
        Matrix* h = curvature != nullptr ? &(*curvature)[static_cast<std::size_t>(j)] : nullptr;
        BfgsResult r = minimize_bfgs(f, std::move(w0), opts, h);
        if (!r.converged) {
            out.converged = false;
            ++out.failed_columns;
        }
        out.m.col(j) = r.x;
    }
    return out;
}

RegularizedFit admm_fit(const BinaryDataset& data, double gamma, double delta, const SolverConfig& config,
                        const SolverState* warm_start, SolverState* final_state) {
    config.validate();
    if (gamma < 0.0 || delta < 0.0) throw InputError("gamma and delta must be nonnegative");
    if (data.n_subjects() < 1) throw InputError("dataset has no subjects");
    const Index j_items = data.n_items();

    SolverState st;
    if (warm_start != nullptr) {
        if (warm_start->n_items() != j_items) throw InputError("warm start has the wrong dimension");
        st = *warm_start;
    } else {
        st = SolverState::zeros(j_items);
    }
    const double lambda = config.lambda;
    const double eps_abs = config.tol_abs * std::sqrt(3.0 * static_cast<double>(j_items * j_items));

    RegularizedFit fit;
    fit.gamma = gamma;
    fit.delta = delta;

    Matrix prev_m_z, prev_l_z, prev_s_z;
    int iter = 0;
    bool converged = false;
    while (iter < config.max_iter) {
        ++iter;
        // Step 1: proximal map of f, three independent blocks.
        ProxSmoothResult pm = prox_smooth_M(st.m_z - st.u_m, data, lambda, config, &st.m, &st.column_curvature);
        if (!pm.converged) fit.subproblem_failures += pm.failed_columns;
        st.m = std::move(pm.m);
        st.l = prox_nuclear_psd(st.l_z - st.u_l, lambda * delta);
        st.s = prox_l1_offdiag(st.s_z - st.u_s, lambda * gamma);

        // Step 2: projection onto {M symmetric, M = L + S}.
        prev_m_z = st.m_z;
        prev_l_z = st.l_z;
        prev_s_z = st.s_z;
        std::tie(st.m_z, st.l_z, st.s_z) = project_consistency(st.m + st.u_m, st.l + st.u_l, st.s + st.u_s);

        // Step 3: scaled dual update.
        const Matrix r_m = st.m - st.m_z;
        const Matrix r_l = st.l - st.l_z;
        const Matrix r_s = st.s - st.s_z;
        st.u_m += r_m;
        st.u_l += r_l;
        st.u_s += r_s;

        st.primal_residual = std::sqrt(r_m.squaredNorm() + r_l.squaredNorm() + r_s.squaredNorm());
        st.dual_residual = std::sqrt((st.m_z - prev_m_z).squaredNorm() + (st.l_z - prev_l_z).squaredNorm() +
                                     (st.s_z - prev_s_z).squaredNorm()) /
                           lambda;
        const double x_norm = std::sqrt(st.m.squaredNorm() + st.l.squaredNorm() + st.s.squaredNorm());
        const double z_norm = std::sqrt(st.m_z.squaredNorm() + st.l_z.squaredNorm() + st.s_z.squaredNorm());
        const double eps = eps_abs + config.tol_rel * std::max(x_norm, z_norm);

        if (config.record_trace) {
            AdmmTraceRow row;
            row.iteration = st.iteration + 1;
            row.objective = penalized_objective(st.l, st.s, data, gamma, delta);
            row.z_objective = penalized_objective(st.l_z, st.s_z, data, gamma, delta);
            row.primal_residual = st.primal_residual;
            row.dual_residual = st.dual_residual;
            fit.trace.push_back(row);
        }
        ++st.iteration;
        if (st.primal_residual <= eps && st.dual_residual <= eps) {
            converged = true;
            break;
        }
    }

    fit.l_hat = st.l;
    fit.s_hat = st.s;
    fit.converged = converged;
    fit.iterations = iter;
    fit.primal_residual = st.primal_residual;
    fit.dual_residual = st.dual_residual;
    fit.objective = penalized_objective(fit.l_hat, fit.s_hat, data, gamma, delta);
    if (final_state != nullptr) *final_state = std::move(st);
    return fit;
}

Index numerical_rank(const Matrix& l) {
    if (l.size() == 0) return 0;
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(l), Eigen::EigenvaluesOnly).eigenvalues();
    const double cut = 1e-8 * std::max(1.0, ev.maxCoeff());
    return static_cast<Index>((ev.array() > cut).count());
}

Structure extract_structure(const RegularizedFit& fit) {
    return {numerical_rank(fit.l_hat), support_edges(fit.s_hat)};
}

}  // namespace flag
