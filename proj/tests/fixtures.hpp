#pragma once

// Small datasets shared by the solver tests and the acceptance binary.

#include "flag/bfgs.hpp"
#include "flag/core_model.hpp"
#include "flag/simulation.hpp"

#include <limits>

namespace fixture {

using flag::Index;
using flag::Matrix;

/// J = 6, one factor plus two pair edges; variant shifts the magnitudes.
inline flag::FlagParams small_truth(int variant) {
    const Index j = 6;
    Matrix a(j, 1);
    for (Index i = 0; i < j; ++i) a(i, 0) = 0.5 + 0.1 * ((i + variant) % 3);
    Matrix s = Matrix::Zero(j, j);
    const double e = 0.8 + 0.2 * variant;
    s(0, 1) = s(1, 0) = e;
    s(3, 5) = s(5, 3) = -0.6 * e;
    const Matrix m = a * a.transpose() + s;
    for (Index i = 0; i < j; ++i) s(i, i) = -m.row(i).sum();
    return flag::FlagParams(a * a.transpose(), s);
}

inline flag::BinaryDataset small_data(int variant, Index n = 500) {
    flag::GibbsConfig cfg;
    cfg.seed = 1000 + static_cast<std::uint64_t>(variant);
    return flag::gibbs_sample(small_truth(variant), n, cfg);
}

/// Unpenalized minimum of h_N over symmetric M, by dense BFGS on the upper
/// triangle. NaN if the solve does not converge.
inline double direct_smooth_minimum(const flag::BinaryDataset& data) {
    using namespace flag;
    const Index j = data.n_items();
    auto unpack = [j](const Vector& v) {
        Matrix m(j, j);
        Index k = 0;
        for (Index c = 0; c < j; ++c)
            for (Index r = c; r < j; ++r) m(r, c) = m(c, r) = v(k++);
        return m;
    };
    Objective f = [&](const Vector& v, Vector& g) {
        const Matrix m = unpack(v);
        const Matrix gm = grad_h(CombinedMatrix(m), data);
        g.resize(v.size());
        Index k = 0;
        for (Index c = 0; c < j; ++c)
            for (Index r = c; r < j; ++r) g(k++) = gm(r, c);
        return smooth_loss(m, data);
    };
    BfgsOptions opts;
    opts.grad_tol = 1e-10;
    opts.max_iter = 5000;
    const BfgsResult r = minimize_bfgs(f, Vector::Zero(j * (j + 1) / 2), opts);
    return r.converged ? r.value : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace fixture
