#pragma once

#include "flag/types.hpp"

#include <functional>

namespace flag {

struct BfgsOptions {
    double grad_tol = 1e-8;  ///< stop when ||grad||_inf <= grad_tol
    int max_iter = 500;
};

struct BfgsResult {
    Vector x;
    double value = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Objective callback: returns f(x) and writes grad f(x).
using Objective = std::function<double(const Vector&, Vector&)>;

/// Dense BFGS with an Armijo backtracking line search.
///
/// `inverse_hessian`, when non-null, seeds the inverse-Hessian approximation
/// and receives the final one, so a sequence of nearby problems can share
/// curvature information. A null or wrongly sized seed starts from a scaled
/// identity.
BfgsResult minimize_bfgs(const Objective& f, Vector x0, const BfgsOptions& opts, Matrix* inverse_hessian = nullptr);

/// Limited-memory BFGS (two-loop recursion, `memory` pairs) with the same
/// line search, for problems too large for a dense inverse Hessian.
BfgsResult minimize_lbfgs(const Objective& f, Vector x0, const BfgsOptions& opts, int memory = 10);

}  // namespace flag
