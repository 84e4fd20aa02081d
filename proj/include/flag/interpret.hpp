#pragma once

#include "flag/types.hpp"

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace flag {

/// A = U_K D_K^{1/2} from the top-K eigenpairs of L (descending, ties kept in
/// solver order). Each column's largest-magnitude entry is made positive.
/// Throws InputError when L has an eigenvalue below -1e-8 * max(1, lambda_max).
LoadingMatrix loadings_from_L(const Matrix& l, Index k);

/// Flips column signs so each column's largest-magnitude entry is positive.
void canonical_signs(Matrix& a);

/// Raw varimax criterion: sum over columns of the variance of squared entries.
double varimax_criterion(const Matrix& a);

struct VarimaxOptions {
    bool kaiser = true;  ///< row-normalize before rotating, undo afterwards
    double tol = 1e-8;   ///< relative criterion change per sweep
    int max_sweeps = 1000;
};

struct RotationResult {
    Matrix a_rot;
    Matrix t;  ///< orthogonal, a_rot = a * t
    double criterion_value = 0.0;
    double criterion_initial = 0.0;
    int sweeps = 0;
    /// Criterion after each sweep, for monotonicity checks.
    std::vector<double> history;
};

/// Varimax by pairwise plane rotations. Output columns are ordered by
/// descending sum of squared loadings and sign-canonicalized. The criterion
/// is evaluated on the Kaiser-normalized rows when `kaiser` is set.
RotationResult varimax(const Matrix& a, const VarimaxOptions& options = {});

/// Posterior-mean factor scores: row i is A^T x_i.
Matrix factor_scores(const Matrix& a, const BinaryDataset& data);

struct ScaleKey {
    std::vector<std::string> labels;  ///< distinct scale labels, in first-seen order
    std::vector<int> scale_of_item;   ///< index into labels, -1 when unassigned
    std::vector<bool> reverse_scored;

    Index n_items() const { return static_cast<Index>(scale_of_item.size()); }
};

/// Reads CSV rows item_index,scale_label,reverse_flag (1-based item index,
/// optional header). Items not listed stay unassigned.
ScaleKey read_scale_key(std::istream& in, Index n_items);

/// Marker used for correlations that are undefined (a zero-variance column).
inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

/// Pearson correlation of every score column with every scale total
/// (unweighted sum of the scale's item responses). K x (number of scales).
Matrix scale_correlations(const Matrix& scores, const ScaleKey& key, const BinaryDataset& data);

/// Pearson correlation; kUndefined when either side has zero variance.
double pearson(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);

using Clique = std::vector<Index>;

/// All maximal cliques of the graph with at least `min_size` vertices, each
/// sorted, the list sorted lexicographically. Bron-Kerbosch with pivoting.
std::vector<Clique> maximal_cliques(const EdgeList& edges, Index n_vertices, Index min_size);

struct CliqueSummary {
    Clique vertices;
    double s_sum = 0.0;  ///< sum of s_ij over the clique's pairs
};

/// Maximal cliques of the support of S, ranked by descending within-clique sum.
std::vector<CliqueSummary> clique_report(const Matrix& s, Index min_size);

/// One line per clique: 1-based item indices and the within-clique sum.
void write_clique_report(std::ostream& os, const std::vector<CliqueSummary>& report);

}  // namespace flag
