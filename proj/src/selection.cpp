#include "flag/selection.hpp"

#include "flag/bfgs.hpp"
#include "flag/core_model.hpp"
#include "flag/interpret.hpp"
#include "flag/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace flag {

Index count_free_params(Index j, Index k, const EdgeList& edges) {
    if (k < 0 || k > j) throw InputError("rank K must lie in [0, J]");
    return (j * k - (k - 1) * k / 2) + static_cast<Index>(edges.size()) + j;
}

double bic_of_entry(double log_pl, Index free_params, Index n) {
    if (n < 1) throw InputError("BIC needs N >= 1");
    return -2.0 * log_pl + static_cast<double>(free_params) * std::log(static_cast<double>(n));
}

namespace {

// Packs (A, diag S, edge values) into one vector and back.
struct SubmodelLayout {
    Index j = 0;
    Index k = 0;
    EdgeList edges;

    Index size() const { return j * k + j + static_cast<Index>(edges.size()); }

    Vector pack(const Matrix& a, const Matrix& s) const {
        Vector v(size());
        v.head(j * k) = a.reshaped();
        v.segment(j * k, j) = s.diagonal();
        for (std::size_t e = 0; e < edges.size(); ++e) v(j * k + j + static_cast<Index>(e)) = s(edges[e].first, edges[e].second);
        return v;
    }

    Matrix loadings(const Vector& v) const { return v.head(j * k).reshaped(j, k); }

    Matrix graph(const Vector& v) const {
        Matrix s = Matrix::Zero(j, j);
        s.diagonal() = v.segment(j * k, j);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const double val = v(j * k + j + static_cast<Index>(e));
            s(edges[e].first, edges[e].second) = val;
            s(edges[e].second, edges[e].first) = val;
        }
        return s;
    }
};

RefitResult refit_from(const BinaryDataset& data, const SubmodelLayout& layout, const Matrix& a0, const Matrix& s0,
                       const RefitOptions& options) {
    const Index j = layout.j;
    const Objective f = [&](const Vector& v, Vector& g) {
        const Matrix a = layout.loadings(v);
        const Matrix m = a * a.transpose() + layout.graph(v);
        const Matrix gm = smooth_loss_gradient(m, data);
        const Matrix gsym = gm + gm.transpose();
        g.resize(v.size());
        g.head(j * layout.k) = (gsym * a).reshaped();
        g.segment(j * layout.k, j) = gm.diagonal();
        for (std::size_t e = 0; e < layout.edges.size(); ++e)
            g(j * layout.k + j + static_cast<Index>(e)) = gsym(layout.edges[e].first, layout.edges[e].second);
        return smooth_loss(m, data);
    };
    BfgsOptions opts;
    opts.grad_tol = options.grad_tol;
    opts.max_iter = options.max_iter;
    const Vector v0 = layout.pack(a0, s0);
    const double n = static_cast<double>(data.n_subjects());

    RefitResult out;
    out.init_log_pl = -n * smooth_loss(a0 * a0.transpose() + layout.graph(v0), data);
    const BfgsResult r = minimize_lbfgs(f, v0, opts);
    out.loadings = layout.loadings(r.x);
    out.params = FlagParams(symmetrized(out.loadings * out.loadings.transpose()), layout.graph(r.x));
    out.log_pl = -n * r.value;
    out.converged = r.converged;
    out.iterations = r.iterations;
    return out;
}

void check_edges(Index j, const EdgeList& edges) {
    for (const auto& [p, q] : edges)
        if (p < 0 || q < 0 || p >= j || q >= j || p == q) throw InputError("edge index out of range");
}

}  // namespace

RefitResult refit_constrained(const BinaryDataset& data, Index k, const EdgeList& edges, const FlagParams& init,
                              const RefitOptions& options) {
    const Index j = data.n_items();
    if (init.n_items() != j) throw InputError("refit: initial parameters do not match the data");
    if (k < 0 || k > j) throw InputError("refit: rank K must lie in [0, J]");
    if (data.n_subjects() < 1) throw InputError("refit: dataset has no subjects");
    check_edges(j, edges);
    SubmodelLayout layout{j, k, edges};
    for (auto& e : layout.edges)
        if (e.first > e.second) std::swap(e.first, e.second);
    const Matrix a0 = loadings_from_L(init.latent(), k).matrix();
    return refit_from(data, layout, a0, layout.graph(layout.pack(Matrix::Zero(j, k), init.graph())), options);
}

RefitResult fit_irt_baseline(const BinaryDataset& data, Index k, const RefitOptions& options) {
    const Index j = data.n_items();
    if (k < 1 || k > j) throw InputError("IRT baseline: K must lie in [1, J]");
    if (data.n_subjects() < 2) throw InputError("IRT baseline: need at least two subjects");
    const double n = static_cast<double>(data.n_subjects());
    const Vector mean = data.column_sums() / n;
    const Matrix cov = (data.gram() - n * mean * mean.transpose()) / (n - 1.0);
    Vector inv_sd(j);
    for (Index i = 0; i < j; ++i) inv_sd(i) = 1.0 / std::sqrt(std::max(cov(i, i), 1e-6));
    const Matrix corr = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(corr);
    Matrix a0(j, k);
    for (Index f = 0; f < k; ++f) {
        const Index col = j - 1 - f;
        a0.col(f) = eig.eigenvectors().col(col) * std::sqrt(std::max(eig.eigenvalues()(col) - 1.0, 0.0) / static_cast<double>(j) + 1e-2);
    }
    // Start each item's logit at its marginal given the latent part at the mean response.
    const Matrix l0 = a0 * a0.transpose();
    Matrix s0 = Matrix::Zero(j, j);
    for (Index i = 0; i < j; ++i) {
        const double p = std::clamp(mean(i), 0.5 / n, 1.0 - 0.5 / n);
        const double latent = l0.row(i).dot(mean) - l0(i, i) * mean(i);
        s0(i, i) = 2.0 * (std::log(p / (1.0 - p)) - latent) - l0(i, i);
    }
    SubmodelLayout layout{j, k, {}};
    return refit_from(data, layout, a0, s0, options);
}

std::vector<double> open_lattice(double lo, double hi, int n) {
    if (n < 1) throw InputError("lattice needs at least one point");
    if (!(hi > lo)) throw InputError("lattice upper end must exceed the lower end");
    std::vector<double> pts(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) pts[static_cast<std::size_t>(i - 1)] = lo + (hi - lo) * i / n;
    return pts;
}

std::vector<double> parse_lattice(const std::string& text) {
    std::istringstream in(text);
    double lo = 0.0, hi = 0.0;
    int n = 0;
    char c1 = 0, c2 = 0;
    if (!(in >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || !in.eof())
        throw InputError("grid '" + text + "' is not of the form lo:hi:n");
    return open_lattice(lo, hi, n);
}

SelectionResult grid_search_select(const BinaryDataset& data, const GridConfig& config) {
    if (config.gammas.empty() || config.rhos.empty()) throw InputError("tuning grids must be non-empty");
    for (double g : config.gammas)
        if (!(g > 0.0)) throw InputError("gamma grid values must be positive");
    for (double r : config.rhos)
        if (!(r > 0.0)) throw InputError("rho grid values must be positive");
    config.solver.validate();

    std::vector<double> gammas = config.gammas;
    std::sort(gammas.begin(), gammas.end());
    const std::size_t ng = gammas.size();
    const std::size_t nr = config.rhos.size();

    SelectionResult result;
    result.path.resize(ng * nr);
    parallel_for(nr, config.jobs, [&](std::size_t r) {
        SolverState state;
        bool have_state = false;
        for (std::size_t g = 0; g < ng; ++g) {
            PathEntry& e = result.path[r * ng + g];
            e.gamma = gammas[g];
            e.rho = config.rhos[r];
            e.delta = e.rho * e.gamma;
            SolverState next;
            e.fit = admm_fit(data, e.gamma, e.delta, config.solver, have_state ? &state : nullptr, &next);
            state = std::move(next);
            have_state = true;
            const Structure st = extract_structure(e.fit);
            e.k_hat = st.rank;
            e.edges = st.edges;
        }
    });

    const Index n = data.n_subjects();
    const Index j = data.n_items();
    parallel_for(result.path.size(), config.jobs, [&](std::size_t i) {
        PathEntry& e = result.path[i];
        e.free_params = count_free_params(j, e.k_hat, e.edges);
        try {
            const RefitResult rf = refit_constrained(data, e.k_hat, e.edges, FlagParams(e.fit.l_hat, e.fit.s_hat), config.refit);
            e.refit_l = rf.params.latent();
            e.refit_s = rf.params.graph();
            e.log_pl_refit = rf.log_pl;
            e.refit_converged = rf.converged;
            e.bic = bic_of_entry(e.log_pl_refit, e.free_params, n);
            e.usable = e.fit.converged && std::isfinite(e.bic);
            if (!e.fit.converged) e.failure = "regularized fit did not converge";
        } catch (const std::exception& ex) {
            e.usable = false;
            e.failure = ex.what();
            e.bic = std::numeric_limits<double>::quiet_NaN();
        }
    });

    bool found = false;
    for (std::size_t i = 0; i < result.path.size(); ++i) {
        const PathEntry& e = result.path[i];
        if (!e.usable) continue;
        if (!found || e.bic < result.path[result.best_index].bic) {
            result.best_index = i;
            found = true;
        }
    }
    if (!found) throw std::runtime_error("no usable grid point: every regularized fit failed to converge");
    result.final_l = result.best().refit_l;
    result.final_s = result.best().refit_s;
    return result;
}

void write_path_csv(std::ostream& os, const std::vector<PathEntry>& path) {
    os << "gamma,delta,K_hat,n_edges,log_pl_refit,free_params,bic,converged\n";
    os << std::setprecision(12);
    for (const auto& e : path)
        os << e.gamma << ',' << e.delta << ',' << e.k_hat << ',' << e.edges.size() << ',' << e.log_pl_refit << ','
           << e.free_params << ',' << e.bic << ',' << (e.fit.converged ? 1 : 0) << '\n';
}

}  // namespace flag
