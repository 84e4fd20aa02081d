#include "flag/evaluation.hpp"

#include "flag/parallel.hpp"
#include "flag/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace flag {

int criterion_path_capture(const std::vector<PathEntry>& path, const Matrix& l_true, const Matrix& s_true) {
    const Index k_true = numerical_rank(l_true);
    const EdgeList e_true = support_edges(s_true);
    for (const auto& e : path)
        if (e.k_hat == k_true && e.edges == e_true) return 1;
    return 0;
}

SelectionMetrics selection_metrics(Index k_hat, const EdgeList& edges, const Matrix& l_true, const Matrix& s_true) {
    require_symmetric(s_true, "true S");
    const Index j = s_true.rows();
    SelectionMetrics m;
    m.c2 = k_hat == numerical_rank(l_true) ? 1 : 0;
    const EdgeList e_true = support_edges(s_true);
    Index tp = 0;
    Index fp = 0;
    for (auto e : edges) {
        if (e.first > e.second) std::swap(e.first, e.second);
        if (std::binary_search(e_true.begin(), e_true.end(), e))
            ++tp;
        else
            ++fp;
    }
    const Index pairs = j * (j - 1) / 2;
    const Index non_edges = pairs - static_cast<Index>(e_true.size());
    m.c3 = e_true.empty() ? std::numeric_limits<double>::quiet_NaN()
                          : static_cast<double>(tp) / static_cast<double>(e_true.size());
    m.c4 = non_edges == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(non_edges);
    return m;
}

SelectionMetrics selection_metrics(const SelectionResult& result, const Matrix& l_true, const Matrix& s_true) {
    return selection_metrics(numerical_rank(result.final_l), support_edges(result.final_s), l_true, s_true);
}

GridConfig study_grid(Index n) {
    if (n < 1) throw InputError("study grid needs N >= 1");
    GridConfig g;
    g.gammas = open_lattice(0.0, 3.0 / std::sqrt(static_cast<double>(n)), 10);
    g.rhos = open_lattice(0.0, 8.0, 4);
    return g;
}

std::uint64_t replicate_seed(std::uint64_t seed, int setting, Index n, int rep) {
    Rng rng = make_stream(seed, (static_cast<std::uint64_t>(setting) << 48) ^ (static_cast<std::uint64_t>(n) << 16) ^
                                    static_cast<std::uint64_t>(rep));
    return rng();
}

ReplicateResult run_replicate(int setting, Index n, int rep, const StudyConfig& config) {
    ReplicateResult r;
    r.setting = setting;
    r.n = n;
    r.rep = rep;
    r.data_seed = replicate_seed(config.seed, setting, n, rep);
    try {
        const SimDesign design = builtin_design(setting, config.magnitudes);
        const SimulatedData sim = simulate_dataset(design, n, r.data_seed);
        GridConfig grid = config.grid(n);
        grid.jobs = 1;
        const SelectionResult sel = grid_search_select(sim.data, grid);
        const Matrix& l_true = sim.truth.latent();
        const Matrix& s_true = sim.truth.graph();
        r.c1 = criterion_path_capture(sel.path, l_true, s_true);
        r.metrics = selection_metrics(sel, l_true, s_true);
        r.k_hat = numerical_rank(sel.final_l);
        r.n_edges = static_cast<Index>(support_edges(sel.final_s).size());
        r.gamma = sel.best().gamma;
        r.rho = sel.best().rho;
    } catch (const std::exception& e) {
        r.failed = true;
        r.failure = e.what();
    }
    return r;
}

namespace {

void mean_se(const std::vector<double>& v, double& mean, double& se) {
    mean = 0.0;
    se = 0.0;
    if (v.empty()) {
        mean = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

StudyResult summarize(int setting, Index n, std::vector<ReplicateResult> reps) {
    StudyResult s;
    s.setting = setting;
    s.n = n;
    s.reps = static_cast<int>(reps.size());
    std::vector<double> c1, c2, c3, c4;
    for (const auto& r : reps) {
        if (r.failed) {
            ++s.failures;
            continue;
        }
        c1.push_back(r.c1);
        c2.push_back(r.metrics.c2);
        if (!std::isnan(r.metrics.c3)) c3.push_back(r.metrics.c3);
        c4.push_back(r.metrics.c4);
    }
    double unused = 0.0;
    mean_se(c1, s.c1_mean, unused);
    mean_se(c2, s.c2_mean, unused);
    mean_se(c3, s.c3_mean, s.c3_se);
    mean_se(c4, s.c4_mean, s.c4_se);
    s.replicates = std::move(reps);
    return s;
}

std::vector<StudyResult> run_simulation_study(const StudyConfig& config) {
    if (config.reps < 1) throw InputError("study needs at least one replication");
    if (config.settings.empty() || config.ns.empty()) throw InputError("study needs at least one setting and one N");
    for (Index n : config.ns)
        if (n < 1) throw InputError("study sample sizes must be positive");
    for (int s : config.settings) builtin_design(s, config.magnitudes);

    struct Task {
        int setting;
        Index n;
        int rep;
    };
    std::vector<Task> tasks;
    for (int s : config.settings)
        for (Index n : config.ns)
            for (int r = 0; r < config.reps; ++r) tasks.push_back({s, n, r});
    std::vector<ReplicateResult> done(tasks.size());
    parallel_for(tasks.size(), config.jobs, [&](std::size_t i) { done[i] = run_replicate(tasks[i].setting, tasks[i].n, tasks[i].rep, config); });

    std::vector<StudyResult> out;
    std::size_t i = 0;
    for (int s : config.settings) {
        for (Index n : config.ns) {
            std::vector<ReplicateResult> cell(done.begin() + static_cast<std::ptrdiff_t>(i),
                                              done.begin() + static_cast<std::ptrdiff_t>(i + static_cast<std::size_t>(config.reps)));
            i += static_cast<std::size_t>(config.reps);
            out.push_back(summarize(s, n, std::move(cell)));
        }
    }
    return out;
}

void write_table1_csv(std::ostream& os, const std::vector<StudyResult>& results) {
    os << "setting,N,reps,failures,C2_mean,C3_mean,C3_se,C4_mean,C4_se\n" << std::setprecision(8);
    for (const auto& r : results)
        os << r.setting << ',' << r.n << ',' << r.reps << ',' << r.failures << ',' << r.c2_mean << ',' << r.c3_mean << ','
           << r.c3_se << ',' << r.c4_mean << ',' << r.c4_se << '\n';
}

void write_figure3_csv(std::ostream& os, const std::vector<StudyResult>& results) {
    os << "setting,N,C1_mean\n" << std::setprecision(8);
    for (const auto& r : results) os << r.setting << ',' << r.n << ',' << r.c1_mean << '\n';
}

void write_replicates_csv(std::ostream& os, const std::vector<StudyResult>& results) {
    os << "setting,N,rep,data_seed,failed,C1,C2,C3,C4,K_hat,n_edges,gamma,rho\n" << std::setprecision(8);
    for (const auto& s : results)
        for (const auto& r : s.replicates)
            os << r.setting << ',' << r.n << ',' << r.rep << ',' << r.data_seed << ',' << (r.failed ? 1 : 0) << ',' << r.c1 << ','
               << r.metrics.c2 << ',' << r.metrics.c3 << ',' << r.metrics.c4 << ',' << r.k_hat << ',' << r.n_edges << ','
               << r.gamma << ',' << r.rho << '\n';
}

}  // namespace flag
