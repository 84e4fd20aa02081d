#include "flag/gof.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace flag;

namespace {

FlagParams small_params() {
    Matrix l(4, 4), s = Matrix::Zero(4, 4);
    Vector a(4);
    a << 0.6, 0.5, 0.7, 0.4;
    l = a * a.transpose();
    s(0, 1) = s(1, 0) = 0.8;
    for (Index j = 0; j < 4; ++j) s(j, j) = -(l + s).row(j).sum();
    return FlagParams(l, s);
}

}  // namespace

TEST_CASE("unnormalized log-likelihood by hand") {
    Matrix m(2, 2);
    m << 1.0, 2.0, 2.0, 3.0;
    Matrix x(2, 2);
    x << 1, 1, 1, 0;
    CHECK(unnormalized_loglik(CombinedMatrix(m), BinaryDataset(x)) == doctest::Approx(4.5));
}

TEST_CASE("add-one p-values") {
    GofReport r;
    r.stat_observed = 2.0;
    r.stats_bootstrap = {1.0, 2.0, 3.0};
    compute_p_values(r);
    CHECK(r.p_lower == doctest::Approx(0.75));
    CHECK(r.p_upper == doctest::Approx(0.75));
    CHECK(r.p_two_sided == doctest::Approx(1.0));
    r.stat_observed = 0.0;
    compute_p_values(r);
    CHECK(r.p_lower == doctest::Approx(0.25));
    CHECK(r.p_upper == doctest::Approx(1.0));
    CHECK(r.p_two_sided == doctest::Approx(0.5));
}

TEST_CASE("bootstrap with B = 1") {
    const FlagParams p = small_params();
    GibbsConfig cfg;
    cfg.seed = 3;
    const BinaryDataset data = gibbs_sample(p, 200, cfg);
    const GofReport r = parametric_bootstrap_gof(data, p, 1, cfg);
    CHECK(r.b == 1);
    REQUIRE(r.stats_bootstrap.size() == 1);
    CHECK((r.p_lower == 0.5 || r.p_lower == 1.0));
    CHECK(r.stat_observed == doctest::Approx(unnormalized_loglik(CombinedMatrix(p), data)));
}

TEST_CASE("bootstrap is reproducible and independent of the worker count") {
    const FlagParams p = small_params();
    GibbsConfig cfg;
    cfg.seed = 8;
    const BinaryDataset data = gibbs_sample(p, 300, cfg);
    const GofReport one = parametric_bootstrap_gof(data, p, 20, cfg, 1);
    const GofReport three = parametric_bootstrap_gof(data, p, 20, cfg, 3);
    std::ostringstream a, b;
    write_bootstrap_csv(a, one);
    write_bootstrap_csv(b, three);
    CHECK(a.str() == b.str());
    CHECK(one.stats_bootstrap == parametric_bootstrap_gof(data, p, 20, cfg, 1).stats_bootstrap);
    std::ostringstream rep;
    write_gof_report(rep, one);
    CHECK(rep.str().find("p_two_sided") != std::string::npos);
}

TEST_CASE("calibration under the true model") {
    const FlagParams p = small_params();
    int small = 0;
    for (int run = 0; run < 10; ++run) {
        GibbsConfig data_cfg;
        data_cfg.seed = 500 + static_cast<std::uint64_t>(run);
        const BinaryDataset data = gibbs_sample(p, 300, data_cfg);
        GibbsConfig boot_cfg;
        boot_cfg.seed = 900 + static_cast<std::uint64_t>(run);
        boot_cfg.burn_in_sweeps = 200;
        if (parametric_bootstrap_gof(data, p, 40, boot_cfg).p_two_sided <= 0.05) ++small;
    }
    CHECK(small <= 2);
}

TEST_CASE("gof input validation") {
    const FlagParams p = small_params();
    CHECK_THROWS_AS(parametric_bootstrap_gof(BinaryDataset(Matrix::Zero(5, 3)), p, 10, {}), InputError);
    CHECK_THROWS_AS(parametric_bootstrap_gof(BinaryDataset(Matrix::Zero(5, 4)), p, 0, {}), InputError);
}
