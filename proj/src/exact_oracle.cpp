#include "flag/exact_oracle.hpp"

#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace flag {

namespace {

void check_cap(Index j) {
    if (j > kMaxEnumerationItems)
        throw InputError("exact enumeration refused: J = " + std::to_string(j) + " exceeds the cap of " +
                         std::to_string(kMaxEnumerationItems) + " items");
}

// Visits outcomes in Gray-code order so each step flips one bit and the
// quadratic form updates in O(J).
std::vector<double> log_weights(const Matrix& m) {
    const Index j = m.rows();
    check_cap(j);
    const std::uint64_t count = std::uint64_t{1} << j;
    std::vector<double> logw(count);
    Vector field = Vector::Zero(j);  // M x
    std::uint64_t state = 0;
    double q = 0.0;  // x^T M x / 2
    logw[0] = 0.0;
    for (std::uint64_t step = 1; step < count; ++step) {
        const int bit = std::countr_zero(step);
        const std::uint64_t mask = std::uint64_t{1} << bit;
        if (state & mask) {
            // 1 -> 0
            q -= field(bit) - 0.5 * m(bit, bit);
            field -= m.col(bit);
        } else {
            q += field(bit) + 0.5 * m(bit, bit);
            field += m.col(bit);
        }
        state ^= mask;
        logw[state] = q;
    }
    return logw;
}

ExactPmf normalize(Index j, std::vector<double> logw) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : logw) mx = std::max(mx, v);
    double total = 0.0;
    for (double& v : logw) {
        v = std::exp(v - mx);
        total += v;
    }
    for (double& v : logw) v /= total;
    ExactPmf pmf;
    pmf.n_items = j;
    pmf.probs = std::move(logw);
    pmf.log_normalizer = mx + std::log(total);
    return pmf;
}

}  // namespace

ExactPmf enumerate_pmf(const CombinedMatrix& m) {
    return normalize(m.n_items(), log_weights(m.matrix()));
}

ExactPmf enumerate_pmf(const FlagParams& params) {
    return enumerate_pmf(CombinedMatrix(params));
}

double ising_normalizer(const Matrix& s) {
    require_symmetric(s, "S");
    return std::exp(normalize(s.rows(), log_weights(s)).log_normalizer);
}

std::uint64_t outcome_index(const Eigen::Ref<const Vector>& x) {
    std::uint64_t idx = 0;
    for (Index k = 0; k < x.size(); ++k) {
        if (x(k) != 0.0 && x(k) != 1.0) throw InputError("response vector is not binary");
        if (x(k) == 1.0) idx |= std::uint64_t{1} << k;
    }
    return idx;
}

Vector outcome_vector(std::uint64_t index, Index n_items) {
    Vector x(n_items);
    for (Index k = 0; k < n_items; ++k) x(k) = static_cast<double>((index >> k) & 1U);
    return x;
}

double exact_conditional(const FlagParams& params, const Eigen::Ref<const Vector>& x, Index j) {
    const Index n = params.n_items();
    if (x.size() != n) throw InputError("response vector length does not match parameters");
    if (j < 0 || j >= n) throw InputError("item index out of range");
    const ExactPmf pmf = enumerate_pmf(params);
    const std::uint64_t base = outcome_index(x) & ~(std::uint64_t{1} << j);
    const double p0 = pmf.probs[base];
    const double p1 = pmf.probs[base | (std::uint64_t{1} << j)];
    return p1 / (p0 + p1);
}

Vector pmf_means(const ExactPmf& pmf) {
    Vector mean = Vector::Zero(pmf.n_items);
    for (std::uint64_t s = 0; s < pmf.probs.size(); ++s)
        for (Index k = 0; k < pmf.n_items; ++k)
            if ((s >> k) & 1U) mean(k) += pmf.probs[s];
    return mean;
}

Matrix pmf_second_moments(const ExactPmf& pmf) {
    Matrix mom = Matrix::Zero(pmf.n_items, pmf.n_items);
    for (std::uint64_t s = 0; s < pmf.probs.size(); ++s) {
        const Vector x = outcome_vector(s, pmf.n_items);
        mom.noalias() += pmf.probs[s] * x * x.transpose();
    }
    return mom;
}

void write_pmf_csv(std::ostream& os, const ExactPmf& pmf) {
    os << "index,bits,probability\n";
    os << std::setprecision(17);
    for (std::uint64_t s = 0; s < pmf.probs.size(); ++s) {
        os << s << ',';
        for (Index k = 0; k < pmf.n_items; ++k) os << ((s >> k) & 1U);
        os << ',' << pmf.probs[s] << '\n';
    }
}

}  // namespace flag
