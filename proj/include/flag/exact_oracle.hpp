#pragma once

#include "flag/types.hpp"

#include <iosfwd>

namespace flag {

/// Enumeration is refused above this many items (cost 2^J).
inline constexpr Index kMaxEnumerationItems = 25;

/// Exact joint pmf f(x | L, S) proportional to exp{x^T (L + S) x / 2}.
///
/// Outcome index bit k (least significant first) is the response of item k.
struct ExactPmf {
    Index n_items = 0;
    std::vector<double> probs;
    /// log sum_x exp{x^T M x / 2}
    double log_normalizer = 0.0;

    double prob(std::uint64_t outcome) const { return probs.at(outcome); }
};

ExactPmf enumerate_pmf(const FlagParams& params);
ExactPmf enumerate_pmf(const CombinedMatrix& m);

/// z(S) = sum_x exp{x^T S x / 2}.
double ising_normalizer(const Matrix& s);

/// P(X_j = 1 | x_{-j}) as a ratio of enumerated joint probabilities.
double exact_conditional(const FlagParams& params, const Eigen::Ref<const Vector>& x, Index j);

/// Marginal mean E[X] and second moment E[X X^T] of an enumerated pmf.
Vector pmf_means(const ExactPmf& pmf);
Matrix pmf_second_moments(const ExactPmf& pmf);

std::uint64_t outcome_index(const Eigen::Ref<const Vector>& x);
Vector outcome_vector(std::uint64_t index, Index n_items);

/// CSV dump: index,bits,probability (bits printed item 1 first).
void write_pmf_csv(std::ostream& os, const ExactPmf& pmf);

}  // namespace flag
