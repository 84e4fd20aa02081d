#include "flag/simulation.hpp"

#include "flag/bfgs.hpp"
#include "flag/core_model.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace flag {

namespace {

double log_sum_exp(const std::vector<double>& v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double t : v) mx = std::max(mx, t);
    double s = 0.0;
    for (double t : v) s += std::exp(t - mx);
    return mx + std::log(s);
}

/// Log weights x_b^T field_b + quad(x_b) over the outcomes of block b.
void block_log_weights(const SimDesign& d, std::size_t b, const Vector& field, std::vector<double>& out) {
    const auto& members = d.blocks()[b];
    const auto& quad = d.block_quadratic(b);
    out.resize(quad.size());
    for (std::size_t s = 0; s < quad.size(); ++s) {
        double lin = 0.0;
        for (std::size_t k = 0; k < members.size(); ++k)
            if ((s >> k) & 1U) lin += field(members[k]);
        out[s] = lin + quad[s];
    }
}

void check_theta(const SimDesign& d, Index k) {
    if (k != d.n_factors()) throw InputError("theta length does not match the number of factors");
}

std::size_t sample_categorical(const std::vector<double>& logw, Rng& rng) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double t : logw) mx = std::max(mx, t);
    double total = 0.0;
    for (double t : logw) total += std::exp(t - mx);
    double u = uniform01(rng) * total;
    for (std::size_t s = 0; s < logw.size(); ++s) {
        u -= std::exp(logw[s] - mx);
        if (u < 0.0) return s;
    }
    return logw.size() - 1;
}

}  // namespace

SimDesign::SimDesign(Matrix loadings, Matrix graph) : a_(std::move(loadings)), s_(std::move(graph)) {
    const Index j = s_.rows();
    require_symmetric(s_, "S");
    if (a_.rows() != j) throw InputError("loading matrix rows must equal the number of items");
    if (a_.cols() > j) throw InputError("more factors than items");
    s_ = symmetrized(s_);

    // Connected components, labelled by smallest member.
    std::vector<Index> parent(static_cast<std::size_t>(j));
    std::iota(parent.begin(), parent.end(), Index{0});
    auto find = [&](Index v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (Index r = 0; r < j; ++r)
        for (Index c = r + 1; c < j; ++c)
            if (s_(r, c) != 0.0) {
                const Index a = find(r), b = find(c);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
    std::vector<Index> slot(static_cast<std::size_t>(j), -1);
    for (Index v = 0; v < j; ++v) {
        const Index root = find(v);
        if (slot[root] < 0) {
            slot[root] = static_cast<Index>(blocks_.size());
            blocks_.emplace_back();
        }
        blocks_[slot[root]].push_back(v);
    }
    for (const auto& members : blocks_) {
        if (static_cast<Index>(members.size()) > kMaxBlockSize)
            throw InputError("graph component of size " + std::to_string(members.size()) + " exceeds the cap of " +
                             std::to_string(kMaxBlockSize));
        const std::size_t count = std::size_t{1} << members.size();
        std::vector<double> q(count, 0.0);
        for (std::size_t s = 0; s < count; ++s) {
            double v = 0.0;
            for (std::size_t p = 0; p < members.size(); ++p) {
                if (!((s >> p) & 1U)) continue;
                v += 0.5 * s_(members[p], members[p]);
                for (std::size_t r = p + 1; r < members.size(); ++r)
                    if ((s >> r) & 1U) v += s_(members[p], members[r]);
            }
            q[s] = v;
        }
        quad_.push_back(std::move(q));
    }
}

void GibbsConfig::validate() const {
    if (burn_in_sweeps < 1) throw InputError("burn-in must be at least one sweep");
    if (thin_sweeps < 1) throw InputError("thinning must be at least one sweep");
}

double theta_log_density_unnorm(const SimDesign& design, const Eigen::Ref<const Vector>& theta) {
    check_theta(design, theta.size());
    const Vector field = design.loadings() * theta;
    double total = -0.5 * theta.squaredNorm();
    std::vector<double> logw;
    for (std::size_t b = 0; b < design.blocks().size(); ++b) {
        block_log_weights(design, b, field, logw);
        total += log_sum_exp(logw);
    }
    return total;
}

Vector theta_log_density_gradient(const SimDesign& design, const Eigen::Ref<const Vector>& theta) {
    check_theta(design, theta.size());
    const Vector field = design.loadings() * theta;
    Vector mean_x = Vector::Zero(design.n_items());
    std::vector<double> logw;
    for (std::size_t b = 0; b < design.blocks().size(); ++b) {
        block_log_weights(design, b, field, logw);
        const double lse = log_sum_exp(logw);
        const auto& members = design.blocks()[b];
        for (std::size_t s = 0; s < logw.size(); ++s) {
            const double p = std::exp(logw[s] - lse);
            for (std::size_t k = 0; k < members.size(); ++k)
                if ((s >> k) & 1U) mean_x(members[k]) += p;
        }
    }
    return -theta + design.loadings().transpose() * mean_x;
}

ThetaSampler::ThetaSampler(const SimDesign& design) : design_(&design) {
    const Index k = design.n_factors();
    const Index j = design.n_items();
    if (k == 0) return;
    const double smax = Eigen::JacobiSVD<Matrix>(design.loadings()).singularValues()(0);
    const double c2 = 1.0 + smax * smax * static_cast<double>(j) / 4.0;
    scale_ = std::sqrt(c2);
    const double curv = 1.0 - 1.0 / c2;

    // Maximize log f(theta) + |theta|^2 / (2 c^2) from several starts.
    const Objective neg_gap = [&](const Vector& th, Vector& g) {
        g = -(theta_log_density_gradient(design, th) + th / c2);
        return -(theta_log_density_unnorm(design, th) + 0.5 * th.squaredNorm() / c2);
    };
    std::vector<Vector> starts;
    starts.push_back(Vector::Zero(k));
    const Matrix& a = design.loadings();
    // With A = 0 the proposal is exact and only the origin is needed.
    if (curv > 0.0) starts.push_back(a.transpose() * Vector::Ones(j) / curv);
    if (curv > 0.0) starts.push_back(a.transpose() * Vector::Constant(j, 0.5) / curv);
    for (Index f = 0; f < k && curv > 0.0; ++f) {
        Vector pos = Vector::Zero(j), neg = Vector::Zero(j);
        for (Index i = 0; i < j; ++i) (a(i, f) > 0 ? pos : neg)(i) = 1.0;
        starts.push_back(a.transpose() * pos / curv);
        starts.push_back(a.transpose() * neg / curv);
    }
    Rng rng = make_stream(0x5eedULL, static_cast<std::uint64_t>(j * 131 + k));
    std::normal_distribution<double> normal;
    for (int r = 0; r < 8; ++r) {
        Vector v(k);
        for (Index i = 0; i < k; ++i) v(i) = scale_ * normal(rng);
        starts.push_back(v);
    }
    BfgsOptions opts;
    opts.grad_tol = 1e-9;
    opts.max_iter = 500;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
        const BfgsResult r = minimize_bfgs(neg_gap, s, opts);
        best = std::max(best, -r.value);
    }
    log_envelope_ = best + std::log(1.01);
}

Vector ThetaSampler::draw(Rng& rng) {
    const SimDesign& d = *design_;
    const Index k = d.n_factors();
    if (k == 0) return Vector(0);
    std::normal_distribution<double> normal;
    const double c2 = scale_ * scale_;
    for (;;) {
        Vector th(k);
        for (Index i = 0; i < k; ++i) th(i) = scale_ * normal(rng);
        ++proposals_;
        const double gap = theta_log_density_unnorm(d, th) + 0.5 * th.squaredNorm() / c2 - log_envelope_;
        if (gap > 0.0) {
            std::ostringstream msg;
            msg << "accept/reject envelope violated: log ratio " << gap << " above the envelope at theta = ["
                << th.transpose() << "], proposal scale " << scale_;
            throw std::runtime_error(msg.str());
        }
        if (std::log(uniform01(rng)) < gap) {
            ++accepted_;
            return th;
        }
    }
}

Vector sample_theta(const SimDesign& design, Rng& rng) {
    ThetaSampler sampler(design);
    return sampler.draw(rng);
}

Vector sample_x_given_theta(const SimDesign& design, const Eigen::Ref<const Vector>& theta, Rng& rng) {
    check_theta(design, theta.size());
    const Vector field = design.loadings() * theta;
    Vector x = Vector::Zero(design.n_items());
    std::vector<double> logw;
    for (std::size_t b = 0; b < design.blocks().size(); ++b) {
        block_log_weights(design, b, field, logw);
        const std::size_t s = sample_categorical(logw, rng);
        const auto& members = design.blocks()[b];
        for (std::size_t k = 0; k < members.size(); ++k)
            if ((s >> k) & 1U) x(members[k]) = 1.0;
    }
    return x;
}

SimulatedData simulate_dataset(const SimDesign& design, Index n, std::uint64_t seed) {
    if (n < 0) throw InputError("sample size must be nonnegative");
    SimulatedData out;
    out.truth = design.truth();
    const Index j = design.n_items();
    Matrix x(n, j);
    out.theta.resize(n, design.n_factors());
    if (n > 0) {
        ThetaSampler sampler(design);
        Rng rng = make_stream(seed, 0);
        for (Index i = 0; i < n; ++i) {
            const Vector th = sampler.draw(rng);
            out.theta.row(i) = th.transpose();
            x.row(i) = sample_x_given_theta(design, th, rng).transpose();
        }
        out.acceptance_rate = sampler.acceptance_rate();
    }
    out.data = BinaryDataset(std::move(x));
    return out;
}

BinaryDataset gibbs_sample(const FlagParams& params, Index n, const GibbsConfig& config, Rng& rng) {
    config.validate();
    if (n < 0) throw InputError("sample size must be nonnegative");
    const Matrix m = params.combined();
    const Index j = m.rows();
    Vector x(j);
    for (Index i = 0; i < j; ++i) x(i) = uniform01(rng) < 0.5 ? 1.0 : 0.0;
    // field(i) = sum_{k != i} m_ik x_k
    Vector field = m * x - m.diagonal().cwiseProduct(x);
    auto sweep = [&] {
        for (Index i = 0; i < j; ++i) {
            const double p = logistic(0.5 * m(i, i) + field(i));
            const double v = uniform01(rng) < p ? 1.0 : 0.0;
            if (v != x(i)) {
                const double delta = v - x(i);
                field += delta * m.col(i);
                field(i) -= delta * m(i, i);
                x(i) = v;
            }
        }
    };
    for (int s = 0; s < config.burn_in_sweeps; ++s) sweep();
    Matrix out(n, j);
    for (Index r = 0; r < n; ++r) {
        for (int s = 0; s < config.thin_sweeps; ++s) sweep();
        out.row(r) = x.transpose();
    }
    return BinaryDataset(std::move(out));
}

BinaryDataset gibbs_sample(const FlagParams& params, Index n, const GibbsConfig& config) {
    Rng rng = make_stream(config.seed, 0);
    return gibbs_sample(params, n, config, rng);
}

SimDesign builtin_design(int setting, const BuiltinMagnitudes& mag) {
    constexpr Index j = 30;
    Matrix s = Matrix::Zero(j, j);
    Matrix a;
    auto link = [&](Index p, Index q) { s(p, q) = s(q, p) = mag.edge_strength; };
    switch (setting) {
        case 1:
        case 3:
            for (Index p = 0; p < j; p += 2) link(p, p + 1);
            break;
        case 2:
            for (Index p = 0; p < j; p += 3) {
                link(p, p + 1);
                link(p, p + 2);
                link(p + 1, p + 2);
            }
            break;
        default:
            throw InputError("unknown simulation setting " + std::to_string(setting) + " (expected 1, 2 or 3)");
    }
    if (setting == 3) {
        a = Matrix::Zero(j, 2);
        for (Index i = 0; i < j; ++i) a(i, i % 2) = mag.two_factor_loading;
    } else {
        a = Matrix::Constant(j, 1, mag.loading);
    }
    // s is still zero on the diagonal here, so each row sum of L + S is the
    // quantity to cancel.
    const Vector row_sums = (a * a.transpose() + s).rowwise().sum();
    s.diagonal() = -row_sums;
    return SimDesign(std::move(a), std::move(s));
}

}  // namespace flag
