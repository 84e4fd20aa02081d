#include "flag/gof.hpp"

#include "flag/parallel.hpp"
#include "flag/rng.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

namespace flag {

double unnormalized_loglik(const CombinedMatrix& m, const BinaryDataset& data) {
    if (m.n_items() != data.n_items()) throw InputError("dimension mismatch between M and the data");
    // sum_i x_i^T M x_i = <M, X^T X>
    return 0.5 * m.matrix().cwiseProduct(data.gram()).sum();
}

void compute_p_values(GofReport& report) {
    const auto b = static_cast<double>(report.stats_bootstrap.size());
    const auto below = std::count_if(report.stats_bootstrap.begin(), report.stats_bootstrap.end(),
                                     [&](double v) { return v <= report.stat_observed; });
    const auto above = std::count_if(report.stats_bootstrap.begin(), report.stats_bootstrap.end(),
                                     [&](double v) { return v >= report.stat_observed; });
    report.b = static_cast<Index>(report.stats_bootstrap.size());
    report.p_lower = (1.0 + static_cast<double>(below)) / (b + 1.0);
    report.p_upper = (1.0 + static_cast<double>(above)) / (b + 1.0);
    report.p_two_sided = std::min(1.0, 2.0 * std::min(report.p_lower, report.p_upper));
}

GofReport parametric_bootstrap_gof(const BinaryDataset& data, const FlagParams& params, Index b,
                                   const GibbsConfig& gibbs, int jobs) {
    if (b < 1) throw InputError("bootstrap needs B >= 1");
    if (params.n_items() != data.n_items()) throw InputError("fitted model does not match the data");
    gibbs.validate();
    const CombinedMatrix m(params);
    GofReport report;
    report.stat_observed = unnormalized_loglik(m, data);
    report.stats_bootstrap.assign(static_cast<std::size_t>(b), 0.0);
    parallel_for(static_cast<std::size_t>(b), jobs, [&](std::size_t r) {
        Rng rng = make_stream(gibbs.seed, r + 1);
        const BinaryDataset boot = gibbs_sample(params, data.n_subjects(), gibbs, rng);
        report.stats_bootstrap[r] = unnormalized_loglik(m, boot);
    });
    compute_p_values(report);
    return report;
}

void write_gof_report(std::ostream& os, const GofReport& report) {
    os << std::setprecision(10);
    os << "statistic_observed: " << report.stat_observed << '\n'
       << "bootstrap_replicates: " << report.b << '\n'
       << "p_lower: " << report.p_lower << '\n'
       << "p_upper: " << report.p_upper << '\n'
       << "p_two_sided: " << report.p_two_sided << '\n';
}

void write_bootstrap_csv(std::ostream& os, const GofReport& report) {
    os << "replicate,statistic\n" << std::setprecision(12);
    for (std::size_t r = 0; r < report.stats_bootstrap.size(); ++r) os << r + 1 << ',' << report.stats_bootstrap[r] << '\n';
}

}  // namespace flag
