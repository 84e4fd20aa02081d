#pragma once

#include "flag/selection.hpp"
#include "flag/simulation.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace flag {

/// 1 when some path entry has rank(L*) factors and exactly the true edge set.
int criterion_path_capture(const std::vector<PathEntry>& path, const Matrix& l_true, const Matrix& s_true);

struct SelectionMetrics {
    int c2 = 0;        ///< rank recovered
    double c3 = 0.0;   ///< true edges found / true edges; NaN when the truth has no edges
    double c4 = 0.0;   ///< false edges / true non-edge pairs
};

SelectionMetrics selection_metrics(Index k_hat, const EdgeList& edges, const Matrix& l_true, const Matrix& s_true);

/// Metrics of the selected model: rank of the final L and support of the final S.
SelectionMetrics selection_metrics(const SelectionResult& result, const Matrix& l_true, const Matrix& s_true);

/// Tuning grid used for one simulated dataset of size n.
using GridForN = std::function<GridConfig(Index n)>;

/// gamma over 10 points in (0, 3 / sqrt(N)], rho over {2, 4, 6, 8}.
GridConfig study_grid(Index n);

struct StudyConfig {
    std::vector<int> settings{1};
    std::vector<Index> ns{250, 2000};
    int reps = 10;
    std::uint64_t seed = 1;
    BuiltinMagnitudes magnitudes;
    GridForN grid = study_grid;
    int jobs = 1;
};

struct ReplicateResult {
    int setting = 0;
    Index n = 0;
    int rep = 0;
    std::uint64_t data_seed = 0;
    bool failed = false;
    std::string failure;
    int c1 = 0;
    SelectionMetrics metrics;
    Index k_hat = 0;
    Index n_edges = 0;
    double gamma = 0.0;
    double rho = 0.0;
};

struct StudyResult {
    int setting = 0;
    Index n = 0;
    int reps = 0;
    int failures = 0;
    double c1_mean = 0.0;
    double c2_mean = 0.0;
    double c3_mean = 0.0;
    double c3_se = 0.0;
    double c4_mean = 0.0;
    double c4_se = 0.0;
    std::vector<ReplicateResult> replicates;
};

/// Seed of replicate `rep` in cell (setting, n); a pure function of its inputs.
std::uint64_t replicate_seed(std::uint64_t seed, int setting, Index n, int rep);

/// One replicate: simulate, grid-search, select and score.
ReplicateResult run_replicate(int setting, Index n, int rep, const StudyConfig& config);

/// Means and standard errors over the non-failed replicates.
StudyResult summarize(int setting, Index n, std::vector<ReplicateResult> reps);

/// Every (setting, N) cell; replicates run in parallel, each fully seeded.
std::vector<StudyResult> run_simulation_study(const StudyConfig& config);

/// CSV: setting,N,reps,failures,C2_mean,C3_mean,C3_se,C4_mean,C4_se (proportions).
void write_table1_csv(std::ostream& os, const std::vector<StudyResult>& results);

/// CSV: setting,N,C1_mean.
void write_figure3_csv(std::ostream& os, const std::vector<StudyResult>& results);

/// CSV: one row per replicate.
void write_replicates_csv(std::ostream& os, const std::vector<StudyResult>& results);

}  // namespace flag
