#pragma once

#include "flag/rng.hpp"
#include "flag/types.hpp"

#include <vector>

namespace flag {

/// Largest connected component of the graph of S that the block samplers
/// will enumerate.
inline constexpr Index kMaxBlockSize = 20;

/// Generating model for simulation: joint density of (x, theta) proportional to
/// exp{-|theta|^2 / 2 + x^T A theta + x^T S x / 2}.
class SimDesign {
  public:
    SimDesign() = default;
    /// Computes the block partition (connected components of the
    /// off-diagonal support of S) and per-block quadratic tables.
    SimDesign(Matrix loadings, Matrix graph);

    Index n_items() const { return a_.rows(); }
    Index n_factors() const { return a_.cols(); }
    const Matrix& loadings() const { return a_; }
    const Matrix& graph() const { return s_; }
    const std::vector<std::vector<Index>>& blocks() const { return blocks_; }

    /// x_b^T S_b x_b / 2 for every outcome of block b (bit k = k-th block member).
    const std::vector<double>& block_quadratic(std::size_t b) const { return quad_[b]; }

    FlagParams truth() const { return FlagParams(symmetrized(a_ * a_.transpose()), s_); }

  private:
    Matrix a_;
    Matrix s_;
    std::vector<std::vector<Index>> blocks_;
    std::vector<std::vector<double>> quad_;
};

struct GibbsConfig {
    int burn_in_sweeps = 500;
    int thin_sweeps = 5;
    std::uint64_t seed = 0;

    void validate() const;
};

/// -|theta|^2 / 2 + sum_b log sum_{x_b} exp{x_b^T (A theta)_b + x_b^T S_b x_b / 2}.
double theta_log_density_unnorm(const SimDesign& design, const Eigen::Ref<const Vector>& theta);

/// Gradient of theta_log_density_unnorm: -theta + A^T E[x | theta].
Vector theta_log_density_gradient(const SimDesign& design, const Eigen::Ref<const Vector>& theta);

/// Exact accept/reject sampler for the marginal of theta.
///
/// Proposal N(0, c^2 I) with c^2 = 1 + sigma_max(A)^2 J / 4. The envelope
/// constant is the multi-start numerical maximum of log target minus log
/// proposal, inflated by 1%; any draw that exceeds it aborts.
class ThetaSampler {
  public:
    explicit ThetaSampler(const SimDesign& design);

    Vector draw(Rng& rng);

    double proposal_scale() const { return scale_; }
    double log_envelope() const { return log_envelope_; }
    double acceptance_rate() const {
        return proposals_ == 0 ? 0.0 : static_cast<double>(accepted_) / static_cast<double>(proposals_);
    }

  private:
    const SimDesign* design_;
    double scale_ = 1.0;
    double log_envelope_ = 0.0;
    std::uint64_t proposals_ = 0;
    std::uint64_t accepted_ = 0;
};

/// One exact draw of theta (builds a fresh envelope; prefer ThetaSampler for
/// repeated draws).
Vector sample_theta(const SimDesign& design, Rng& rng);

/// Exact draw of x given theta, block by block.
Vector sample_x_given_theta(const SimDesign& design, const Eigen::Ref<const Vector>& theta, Rng& rng);

struct SimulatedData {
    BinaryDataset data;
    Matrix theta;  ///< N x K latent draws
    FlagParams truth;
    double acceptance_rate = 0.0;
};

/// N i.i.d. (theta_i, x_i) pairs. A dataset with N = 0 is returned empty.
SimulatedData simulate_dataset(const SimDesign& design, Index n, std::uint64_t seed);

/// Single-site Gibbs chain on f(x | L, S) from a uniform random start.
BinaryDataset gibbs_sample(const FlagParams& params, Index n, const GibbsConfig& config);
BinaryDataset gibbs_sample(const FlagParams& params, Index n, const GibbsConfig& config, Rng& rng);

/// Generating magnitudes. The two-factor loading gives each of Setting 3's
/// factors (15 items each) the same leading eigenvalue of A A^T as Setting 1's
/// single factor over 30 items.
struct BuiltinMagnitudes {
    double edge_strength = 1.0;
    double loading = 0.25;
    double two_factor_loading = 0.3536;
};

/// The three 30-item designs: (1) K = 1 with 15 disjoint pair edges,
/// (2) K = 1 with 10 disjoint triangles, (3) K = 2 with the pair graph and
/// loadings alternating between the two factors. Diagonals of S make every
/// row of L + S sum to zero, which makes the model symmetric under flipping
/// all responses and puts every item marginal at exactly 1/2.
SimDesign builtin_design(int setting, const BuiltinMagnitudes& magnitudes = {});

}  // namespace flag
