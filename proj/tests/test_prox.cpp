#include "flag/prox.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace flag;

namespace {

double projection_distance(const Matrix& m, const Matrix& l, const Matrix& s, const Matrix& bm, const Matrix& bl,
                           const Matrix& bs) {
    return (m - bm).squaredNorm() + (l - bl).squaredNorm() + (s - bs).squaredNorm();
}

}  // namespace

TEST_CASE("eigenvalue thresholding: diagonal example") {
    Vector d(3);
    d << 3.0, 1.0, 0.1;
    Index rank = -1;
    const Matrix out = prox_nuclear_psd(Matrix(d.asDiagonal()), 0.5, &rank);
    Matrix expected = Matrix::Zero(3, 3);
    expected(0, 0) = 2.5;
    expected(1, 1) = 0.5;
    CHECK((out - expected).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(rank == 2);
}

TEST_CASE("eigenvalue thresholding: zero threshold projects onto the PSD cone") {
    Matrix t(2, 2);
    t << 1.0, 0.0, 0.0, -2.0;
    const Matrix out = prox_nuclear_psd(t, 0.0);
    CHECK(out(0, 0) == doctest::Approx(1.0));
    CHECK(std::abs(out(1, 1)) <= 1e-15);
}

TEST_CASE("eigenvalue thresholding matches 2x2 grid search") {
    oracle::Gen g(31);
    for (int rep = 0; rep < 12; ++rep) {
        const Matrix target = oracle::random_symmetric(2, 2.0, g);
        const double t = oracle::unif(g, 0.0, 1.0);
        const Matrix got = prox_nuclear_psd(target, t);
        const Matrix ref = oracle::grid_prox_psd_2x2(target, t);
        CHECK((got - ref).cwiseAbs().maxCoeff() <= 1e-3);
        CHECK(oracle::nuclear_objective(got, target, t) <= oracle::nuclear_objective(ref, target, t) + 1e-12);
    }
}

TEST_CASE("eigenvalue thresholding output is PSD and symmetric") {
    oracle::Gen g(2);
    for (int rep = 0; rep < 30; ++rep) {
        const Matrix target = oracle::random_symmetric(7, 3.0, g);
        Index rank = 0;
        const Matrix out = prox_nuclear_psd(target, oracle::unif(g, 0.0, 2.0), &rank);
        CHECK(out == out.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> eig(out);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
        Index big = 0;
        for (Index k = 0; k < 7; ++k) big += eig.eigenvalues()(k) > 1e-10 ? 1 : 0;
        CHECK(big == rank);
    }
}

TEST_CASE("soft threshold matches scalar minimization") {
    CHECK(soft_threshold(3.0, 1.0) == 2.0);
    CHECK(soft_threshold(-3.0, 1.0) == -2.0);
    CHECK(soft_threshold(0.5, 1.0) == 0.0);
    CHECK(soft_threshold(-1.0, 1.0) == 0.0);
    oracle::Gen g(7);
    for (int rep = 0; rep < 200; ++rep) {
        const double v = oracle::unif(g, -5.0, 5.0);
        const double t = oracle::unif(g, 0.0, 3.0);
        // zero of the (monotone) derivative of t|s| + (s - v)^2 / 2
        const double ref = oracle::bisect_increasing([&](double s) { return s - v + (s > 0 ? t : s < 0 ? -t : 0.0); },
                                                     -10.0, 10.0);
        CHECK(std::abs(soft_threshold(v, t) - ref) <= 1e-10);
    }
}

TEST_CASE("off-diagonal soft threshold keeps the diagonal") {
    Matrix t(3, 3);
    t << 5.0, 0.3, -2.0, 0.3, -4.0, 1.5, -2.0, 1.5, 0.0;
    const Matrix out = prox_l1_offdiag(t, 1.0);
    Matrix expected(3, 3);
    expected << 5.0, 0.0, -1.0, 0.0, -4.0, 0.5, -1.0, 0.5, 0.0;
    CHECK(out == expected);
    CHECK_THROWS_AS(prox_l1_offdiag(Matrix::Random(3, 3).eval(), 1.0), InputError);
}

TEST_CASE("consistency projection: closed form, constraints, optimality") {
    Matrix bm(2, 2), bl(2, 2), bs(2, 2);
    bm << 3.0, 0.0, 0.0, 0.0;
    bl.setZero();
    bs.setZero();
    auto [m0, l0, s0] = project_consistency(bm, bl, bs);
    CHECK(m0(0, 0) == doctest::Approx(2.0));
    CHECK(l0(0, 0) == doctest::Approx(1.0));
    CHECK(s0(0, 0) == doctest::Approx(1.0));

    oracle::Gen g(13);
    for (int rep = 0; rep < 10; ++rep) {
        const Index j = 5;
        Matrix bar_m(j, j);
        for (Index r = 0; r < j; ++r)
            for (Index c = 0; c < j; ++c) bar_m(r, c) = oracle::unif(g, -2, 2);
        const Matrix bar_l = oracle::random_symmetric(j, 2.0, g);
        const Matrix bar_s = oracle::random_symmetric(j, 2.0, g);
        auto [m, l, s] = project_consistency(bar_m, bar_l, bar_s);
        CHECK((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
        CHECK((m - l - s).cwiseAbs().maxCoeff() <= 1e-14);
        const double d0 = projection_distance(m, l, s, bar_m, bar_l, bar_s);
        for (int probe = 0; probe < 500; ++probe) {
            const Matrix pl = l + oracle::random_symmetric(j, 0.5, g);
            const Matrix ps = s + oracle::random_symmetric(j, 0.5, g);
            CHECK(projection_distance(pl + ps, pl, ps, bar_m, bar_l, bar_s) >= d0);
        }
        // residual is orthogonal to every feasible direction (dL, dS)
        const Matrix rm = m - bar_m, rl = l - bar_l, rs = s - bar_s;
        for (int probe = 0; probe < 20; ++probe) {
            const Matrix dl = oracle::random_symmetric(j, 1.0, g);
            const Matrix ds = oracle::random_symmetric(j, 1.0, g);
            const double inner = (rm.cwiseProduct(dl + ds)).sum() + rl.cwiseProduct(dl).sum() + rs.cwiseProduct(ds).sum();
            CHECK(std::abs(inner) <= 1e-12);
        }
    }
}
