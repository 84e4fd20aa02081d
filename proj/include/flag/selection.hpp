#pragma once

#include "flag/admm.hpp"
#include "flag/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace flag {

/// Free parameters of the submodel with a rank-K latent part and the given
/// off-diagonal edges: (J K - (K - 1) K / 2) + |edges| + J. The trailing J
/// counts the unpenalized diagonal of S.
Index count_free_params(Index j, Index k, const EdgeList& edges);

/// -2 log_pl + free_params * ln N.
double bic_of_entry(double log_pl, Index free_params, Index n);

struct RefitOptions {
    double grad_tol = 1e-7;
    int max_iter = 2000;
};

struct RefitResult {
    FlagParams params;
    Matrix loadings;  ///< J x K factor with L = A A^T
    double log_pl = 0.0;
    double init_log_pl = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Unpenalized maximum pseudo-likelihood over {L = A A^T, A of width K;
/// S supported on the diagonal and `edges`}, started from `init`.
///
/// The starting A is the top-K eigen-factor of init.L and the starting S is
/// init.S restricted to the allowed support.
RefitResult refit_constrained(const BinaryDataset& data, Index k, const EdgeList& edges, const FlagParams& init,
                              const RefitOptions& options = {});

/// Rank-K IRT model (no off-diagonal S), started from the top-K principal
/// directions of the response covariance and per-item logits.
RefitResult fit_irt_baseline(const BinaryDataset& data, Index k, const RefitOptions& options = {});

/// Points lo + (hi - lo) i / n for i = 1..n: the left-open lattice (lo, hi].
std::vector<double> open_lattice(double lo, double hi, int n);

/// Parses "lo:hi:n" into open_lattice(lo, hi, n).
std::vector<double> parse_lattice(const std::string& text);

struct GridConfig {
    std::vector<double> gammas = open_lattice(0.0, 0.02, 20);
    std::vector<double> rhos = open_lattice(10.0, 20.0, 20);
    SolverConfig solver;
    RefitOptions refit;
    int jobs = 1;
};

struct PathEntry {
    double gamma = 0.0;
    double delta = 0.0;
    double rho = 0.0;
    RegularizedFit fit;
    Index k_hat = 0;
    EdgeList edges;
    Matrix refit_l;
    Matrix refit_s;
    double log_pl_refit = 0.0;
    Index free_params = 0;
    double bic = 0.0;
    bool refit_converged = false;
    /// False when the regularized fit did not converge or the refit failed;
    /// such entries are kept on the path but never selected.
    bool usable = false;
    std::string failure;
};

struct SelectionResult {
    std::vector<PathEntry> path;
    std::size_t best_index = 0;
    Matrix final_l;
    Matrix final_s;

    const PathEntry& best() const { return path.at(best_index); }
};

/// Fits every (gamma, rho * gamma) pair, extracts structure, refits and scores
/// each submodel by BIC. Rows of fixed rho run in parallel; within a row the
/// gammas are visited in ascending order, each fit warm-started from the
/// previous one. Throws std::runtime_error if no grid point is usable.
SelectionResult grid_search_select(const BinaryDataset& data, const GridConfig& config);

/// CSV: gamma,delta,K_hat,n_edges,log_pl_refit,free_params,bic,converged.
void write_path_csv(std::ostream& os, const std::vector<PathEntry>& path);

}  // namespace flag
