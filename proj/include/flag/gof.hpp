#pragma once

#include "flag/simulation.hpp"
#include "flag/types.hpp"

#include <iosfwd>
#include <vector>

namespace flag {

/// 1/2 sum_i x_i^T M x_i.
double unnormalized_loglik(const CombinedMatrix& m, const BinaryDataset& data);

struct GofReport {
    double stat_observed = 0.0;
    std::vector<double> stats_bootstrap;
    double p_lower = 1.0;  ///< (1 + #{l_b <= l_obs}) / (B + 1)
    double p_upper = 1.0;  ///< (1 + #{l_b >= l_obs}) / (B + 1)
    double p_two_sided = 1.0;
    Index b = 0;
};

/// Fills the three add-one Monte Carlo p-values from the statistics.
void compute_p_values(GofReport& report);

/// Draws B datasets of the observed size from `params` by Gibbs sampling
/// (replicate b on its own stream of gibbs.seed) and compares their statistics
/// with the observed one, all under the same M = L + S.
GofReport parametric_bootstrap_gof(const BinaryDataset& data, const FlagParams& params, Index b,
                                   const GibbsConfig& gibbs, int jobs = 1);

/// Key: value summary of the report.
void write_gof_report(std::ostream& os, const GofReport& report);

/// CSV: replicate,statistic.
void write_bootstrap_csv(std::ostream& os, const GofReport& report);

}  // namespace flag
