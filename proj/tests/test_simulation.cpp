#include "flag/exact_oracle.hpp"
#include "flag/simulation.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

using namespace flag;

namespace {

SimDesign small_design() {
    Matrix a(4, 1);
    a << 0.8, 0.5, -0.4, 0.6;
    Matrix s = Matrix::Zero(4, 4);
    s(0, 1) = s(1, 0) = 0.9;
    s(2, 3) = s(3, 2) = -0.7;
    s(0, 0) = -0.5;
    s(3, 3) = 0.3;
    return SimDesign(a, s);
}

// log of sum_x exp(-|theta|^2/2 + x^T A theta + x^T S x / 2) by enumeration.
double brute_theta_log_density(const SimDesign& d, const Vector& theta) {
    const Index j = d.n_items();
    double total = 0.0;
    for (unsigned long c = 0; c < (1UL << j); ++c) {
        const Vector x = oracle::msb_outcome(c, j);
        total += std::exp(x.dot(d.loadings() * theta) + 0.5 * x.dot(d.graph() * x));
    }
    return -0.5 * theta.squaredNorm() + std::log(total);
}

double total_variation(const std::vector<double>& p, const std::map<std::uint64_t, double>& counts, double n) {
    double tv = 0.0;
    for (std::uint64_t c = 0; c < p.size(); ++c) {
        const auto it = counts.find(c);
        tv += std::abs(p[c] - (it == counts.end() ? 0.0 : it->second / n));
    }
    return 0.5 * tv;
}

std::map<std::uint64_t, double> tally(const Matrix& x) {
    std::map<std::uint64_t, double> counts;
    for (Index r = 0; r < x.rows(); ++r) counts[outcome_index(x.row(r).transpose())] += 1.0;
    return counts;
}

}  // namespace

TEST_CASE("theta density: enumeration oracle and gradient") {
    const SimDesign d = small_design();
    oracle::Gen g(5);
    for (int rep = 0; rep < 20; ++rep) {
        Vector theta(1);
        theta(0) = oracle::unif(g, -3, 3);
        const double got = theta_log_density_unnorm(d, theta);
        CHECK(std::abs(got - brute_theta_log_density(d, theta)) <= 1e-12 * std::max(1.0, std::abs(got)));
        auto f = [&](const Vector& t) { return theta_log_density_unnorm(d, t); };
        CHECK((theta_log_density_gradient(d, theta) - oracle::fd_gradient(f, theta)).cwiseAbs().maxCoeff() <= 1e-7);
    }
    // A = 0: a Gaussian kernel plus a constant
    const SimDesign z(Matrix::Zero(4, 2), Matrix::Zero(4, 4));
    Vector t(2);
    t << 1.0, -2.0;
    CHECK(theta_log_density_unnorm(z, t) == doctest::Approx(-2.5 + 4.0 * std::log(2.0)));
}

TEST_CASE("SimDesign blocks follow the graph components") {
    const SimDesign d = small_design();
    REQUIRE(d.blocks().size() == 2);
    CHECK(d.blocks()[0] == std::vector<Index>{0, 1});
    CHECK(d.blocks()[1] == std::vector<Index>{2, 3});
    Matrix big = Matrix::Zero(25, 25);
    for (Index i = 0; i + 1 < 25; ++i) big(i, i + 1) = big(i + 1, i) = 0.1;
    CHECK_THROWS_AS(SimDesign(Matrix::Zero(25, 1), big), InputError);
}

TEST_CASE("A = 0 theta draws are standard normal") {
    const SimDesign d(Matrix::Zero(4, 1), Matrix::Zero(4, 4));
    ThetaSampler sampler(d);
    Rng rng = make_stream(3, 0);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = sampler.draw(rng)(0);
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean) <= 0.02);
    CHECK(std::abs(sq / n - mean * mean - 1.0) <= 0.02);
}

TEST_CASE("theta draws match the quadrature CDF (Kolmogorov-Smirnov)") {
    Matrix a(2, 1);
    a << 1.2, 0.7;
    Matrix s = Matrix::Zero(2, 2);
    s(0, 1) = s(1, 0) = 0.5;
    s(0, 0) = -1.0;
    const SimDesign d(a, s);
    const double lo = -10.0, hi = 10.0;
    const int cells = 20000;
    const double h = (hi - lo) / cells;
    std::vector<double> cdf(cells + 1, 0.0);
    auto dens = [&](double t) {
        Vector v(1);
        v(0) = t;
        return std::exp(brute_theta_log_density(d, v));
    };
    for (int i = 0; i < cells; ++i) cdf[i + 1] = cdf[i] + oracle::simpson(dens, lo + i * h, lo + (i + 1) * h, 2);
    for (double& c : cdf) c /= cdf.back();

    ThetaSampler sampler(d);
    Rng rng = make_stream(9, 1);
    const int n = 100000;
    std::vector<double> draws(n);
    for (double& v : draws) v = sampler.draw(rng)(0);
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double pos = std::clamp((draws[i] - lo) / h, 0.0, double(cells) - 1e-9);
        const int c = static_cast<int>(pos);
        const double f = cdf[c] + (pos - c) * (cdf[c + 1] - cdf[c]);
        ks = std::max({ks, std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)});
    }
    CHECK(ks <= 0.01);
    CHECK(sampler.acceptance_rate() > 0.0);
    CHECK(sampler.acceptance_rate() <= 1.0);
}

TEST_CASE("x given theta matches the enumerated conditional") {
    const SimDesign d = small_design();
    Vector theta(1);
    theta(0) = 0.7;
    std::vector<double> p(16);
    double z = 0.0;
    for (std::uint64_t c = 0; c < 16; ++c) {
        const Vector x = outcome_vector(c, 4);
        p[c] = std::exp(x.dot(d.loadings() * theta) + 0.5 * x.dot(d.graph() * x));
        z += p[c];
    }
    for (double& v : p) v /= z;
    Rng rng = make_stream(4, 0);
    Matrix x(100000, 4);
    for (Index r = 0; r < x.rows(); ++r) x.row(r) = sample_x_given_theta(d, theta, rng).transpose();
    CHECK(total_variation(p, tally(x), 100000.0) <= 0.01);
}

TEST_CASE("simulated responses follow the FLaG marginal") {
    const SimDesign d = small_design();
    const SimulatedData sim = simulate_dataset(d, 100000, 42);
    const ExactPmf pmf = enumerate_pmf(sim.truth);
    CHECK(total_variation(pmf.probs, tally(sim.data.responses()), 100000.0) <= 0.01);
    CHECK(sim.theta.rows() == 100000);
    CHECK(sim.acceptance_rate > 0.0);
}

TEST_CASE("Gibbs sampler matches enumeration") {
    Matrix l(3, 3), s(3, 3);
    l << 0.5, 0.3, -0.2, 0.3, 0.4, 0.1, -0.2, 0.1, 0.3;
    s << -0.6, 1.0, 0.0, 1.0, 0.2, -0.8, 0.0, -0.8, 0.4;
    const FlagParams params(l, s);
    GibbsConfig cfg;
    cfg.seed = 17;
    const BinaryDataset data = gibbs_sample(params, 100000, cfg);
    CHECK(total_variation(enumerate_pmf(params).probs, tally(data.responses()), 100000.0) <= 0.02);
}

TEST_CASE("samplers are deterministic under a seed") {
    const SimDesign d = small_design();
    CHECK(simulate_dataset(d, 300, 5).data == simulate_dataset(d, 300, 5).data);
    CHECK(!(simulate_dataset(d, 300, 5).data == simulate_dataset(d, 300, 6).data));
    GibbsConfig cfg;
    cfg.seed = 2;
    CHECK(gibbs_sample(d.truth(), 200, cfg) == gibbs_sample(d.truth(), 200, cfg));
    CHECK(simulate_dataset(d, 0, 1).data.n_subjects() == 0);
}

TEST_CASE("built-in designs") {
    for (int setting = 1; setting <= 3; ++setting) {
        const SimDesign d = builtin_design(setting);
        CHECK(d.n_items() == 30);
        CHECK(d.n_factors() == (setting == 3 ? 2 : 1));
        const FlagParams t = d.truth();
        const Matrix m = t.combined();
        CHECK(m.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
        const std::size_t edges = support_edges(t.graph()).size();
        CHECK(edges == (setting == 2 ? 30u : 15u));
        for (const auto& b : d.blocks()) CHECK(b.size() == (setting == 2 ? 3u : 2u));
        const SimulatedData sim = simulate_dataset(d, 2000, 11);
        CHECK(sim.acceptance_rate > 0.0);
        CHECK(std::isfinite(sim.acceptance_rate));
        CHECK((sim.data.column_sums() / 2000.0 - Vector::Constant(30, 0.5)).cwiseAbs().maxCoeff() <= 0.06);
    }
    CHECK_THROWS_AS(builtin_design(4), InputError);
}

TEST_CASE("Gibbs config validation") {
    GibbsConfig cfg;
    cfg.thin_sweeps = 0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = {};
    cfg.burn_in_sweeps = -1;
    CHECK_THROWS_AS(cfg.validate(), InputError);
}
