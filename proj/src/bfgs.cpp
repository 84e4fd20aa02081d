#include "flag/bfgs.hpp"

#include <cmath>
#include <deque>

namespace flag {

namespace {

// Backtracking from `step` along `dir`. Accepts on the Armijo condition, or,
// once the decrease is below the rounding level of f, on the approximate
// Wolfe condition (directional derivative still negative enough), so the
// search keeps making progress on the gradient near a minimum.
bool line_search(const Objective& f, const Vector& x, double fx, const Vector& dir, double slope, double step,
                 Vector& x_new, double& f_new, Vector& g_new) {
    const double noise = 1e-12 * std::max(1.0, std::abs(fx));
    for (int ls = 0; ls < 60; ++ls) {
        x_new = x + step * dir;
        f_new = f(x_new, g_new);
        if (std::isfinite(f_new)) {
            if (f_new <= fx + 1e-4 * step * slope) return true;
            if (f_new <= fx + noise && g_new.dot(dir) <= (1.0 - 2e-4) * -slope && g_new.dot(dir) >= 0.9 * slope) return true;
        }
        step *= 0.5;
    }
    return false;
}

}  // namespace

BfgsResult minimize_bfgs(const Objective& f, Vector x0, const BfgsOptions& opts, Matrix* inverse_hessian) {
    const Index n = x0.size();
    BfgsResult res;
    res.x = std::move(x0);
    Vector g(n);
    double fx = f(res.x, g);
    if (!std::isfinite(fx)) throw std::runtime_error("BFGS: objective is not finite at the starting point");

    Matrix h;
    bool fresh = true;
    if (inverse_hessian != nullptr && inverse_hessian->rows() == n && inverse_hessian->cols() == n) {
        h = *inverse_hessian;
        fresh = false;
    } else {
        h = Matrix::Identity(n, n);
    }

    Vector x_new(n), g_new(n), s(n), y(n), hy(n);
    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) break;
        Vector dir = -(h * g);
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            // Lost descent; restart from steepest descent.
            h.setIdentity();
            fresh = true;
            dir = -g;
            slope = -g.squaredNorm();
        }
        double step = 1.0;
        if (fresh) step = std::min(1.0, 1.0 / std::max(1e-12, g.lpNorm<Eigen::Infinity>()));
        double f_new = 0.0;
        if (!line_search(f, res.x, fx, dir, slope, step, x_new, f_new, g_new)) break;
        s = x_new - res.x;
        y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (fresh) {
                h *= sy / y.squaredNorm();
                fresh = false;
            }
            hy.noalias() = h * y;
            const double rho = 1.0 / sy;
            const double yhy = y.dot(hy);
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            h.noalias() += (rho * rho * yhy + rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
        }
        res.x.swap(x_new);
        g.swap(g_new);
        fx = f_new;
    }
    res.value = fx;
    res.grad_norm = g.lpNorm<Eigen::Infinity>();
    res.iterations = iter;
    res.converged = res.grad_norm <= opts.grad_tol;
    if (inverse_hessian != nullptr) *inverse_hessian = std::move(h);
    return res;
}

BfgsResult minimize_lbfgs(const Objective& f, Vector x0, const BfgsOptions& opts, int memory) {
    const Index n = x0.size();
    BfgsResult res;
    res.x = std::move(x0);
    Vector g(n);
    double fx = f(res.x, g);
    if (!std::isfinite(fx)) throw std::runtime_error("L-BFGS: objective is not finite at the starting point");

    std::deque<Vector> s_hist, y_hist;
    std::deque<double> rho_hist;
    Vector x_new(n), g_new(n), q(n);
    std::vector<double> alpha(static_cast<std::size_t>(memory));
    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) break;
        q = g;
        const std::size_t m = s_hist.size();
        for (std::size_t k = m; k-- > 0;) {
            alpha[k] = rho_hist[k] * s_hist[k].dot(q);
            q -= alpha[k] * y_hist[k];
        }
        if (m > 0) q *= 1.0 / (rho_hist[m - 1] * y_hist[m - 1].squaredNorm());
        for (std::size_t k = 0; k < m; ++k) {
            const double beta = rho_hist[k] * y_hist[k].dot(q);
            q += (alpha[k] - beta) * s_hist[k];
        }
        Vector dir = -q;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            dir = -g;
            slope = -g.squaredNorm();
        }
        double step = s_hist.empty() ? std::min(1.0, 1.0 / std::max(1e-12, g.lpNorm<Eigen::Infinity>())) : 1.0;
        double f_new = 0.0;
        if (!line_search(f, res.x, fx, dir, slope, step, x_new, f_new, g_new)) break;
        Vector s = x_new - res.x;
        Vector y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (static_cast<int>(s_hist.size()) == memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
        }
        res.x.swap(x_new);
        g.swap(g_new);
        fx = f_new;
    }
    res.value = fx;
    res.grad_norm = g.lpNorm<Eigen::Infinity>();
    res.iterations = iter;
    res.converged = res.grad_norm <= opts.grad_tol;
    return res;
}

}  // namespace flag
