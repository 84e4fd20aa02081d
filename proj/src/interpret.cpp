#include "flag/interpret.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace flag {

void canonical_signs(Matrix& a) {
    for (Index c = 0; c < a.cols(); ++c) {
        Index arg = 0;
        a.col(c).cwiseAbs().maxCoeff(&arg);
        if (a(arg, c) < 0.0) a.col(c) *= -1.0;
    }
}

LoadingMatrix loadings_from_L(const Matrix& l, Index k) {
    require_symmetric(l, "loadings_from_L");
    const Index j = l.rows();
    if (k < 0 || k > j) throw InputError("loadings_from_L: K must lie in [0, J]");
    if (k == 0) return LoadingMatrix(Matrix::Zero(j, 0));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(l));
    const Vector& ev = eig.eigenvalues();
    const double top = ev(j - 1);
    if (ev(0) < -1e-8 * std::max(1.0, top)) throw InputError("loadings_from_L: matrix is not positive semidefinite");

    std::vector<Index> order(static_cast<std::size_t>(j));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return ev(a) > ev(b); });
    Matrix a(j, k);
    for (Index c = 0; c < k; ++c) {
        const Index src = order[static_cast<std::size_t>(c)];
        a.col(c) = eig.eigenvectors().col(src) * std::sqrt(std::max(ev(src), 0.0));
    }
    canonical_signs(a);
    return LoadingMatrix(std::move(a));
}

double varimax_criterion(const Matrix& a) {
    if (a.rows() == 0) return 0.0;
    const double n = static_cast<double>(a.rows());
    const Eigen::ArrayXXd sq = a.array().square();
    double v = 0.0;
    for (Index c = 0; c < a.cols(); ++c) {
        const double mean = sq.col(c).sum() / n;
        v += sq.col(c).square().sum() / n - mean * mean;
    }
    return v;
}

namespace {

// Optimal plane rotation angle for columns (p, q) of x.
double pair_angle(const Matrix& x, Index p, Index q) {
    const double n = static_cast<double>(x.rows());
    const Eigen::ArrayXd u = x.col(p).array().square() - x.col(q).array().square();
    const Eigen::ArrayXd v = 2.0 * x.col(p).array() * x.col(q).array();
    const double a = u.sum();
    const double b = v.sum();
    const double c = (u.square() - v.square()).sum();
    const double d = 2.0 * (u * v).sum();
    return 0.25 * std::atan2(d - 2.0 * a * b / n, c - (a * a - b * b) / n);
}

void rotate_pair(Matrix& x, Index p, Index q, double cs, double sn) {
    const Vector xp = x.col(p);
    x.col(p) = cs * xp + sn * x.col(q);
    x.col(q) = -sn * xp + cs * x.col(q);
}

}  // namespace

RotationResult varimax(const Matrix& a, const VarimaxOptions& options) {
    const Index j = a.rows();
    const Index k = a.cols();
    if (k < 1) throw InputError("varimax: need at least one factor");
    RotationResult res;
    res.t = Matrix::Identity(k, k);

    Vector h = Vector::Ones(j);
    if (options.kaiser) {
        h = a.rowwise().norm();
        for (Index i = 0; i < j; ++i)
            if (h(i) == 0.0) h(i) = 1.0;
    }
    Matrix x = h.cwiseInverse().asDiagonal() * a;
    res.criterion_initial = varimax_criterion(x);
    double crit = res.criterion_initial;

    if (k > 1) {
        for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
            for (Index p = 0; p + 1 < k; ++p) {
                for (Index q = p + 1; q < k; ++q) {
                    const double phi = pair_angle(x, p, q);
                    const double cs = std::cos(phi);
                    const double sn = std::sin(phi);
                    rotate_pair(x, p, q, cs, sn);
                    rotate_pair(res.t, p, q, cs, sn);
                }
            }
            const double next = varimax_criterion(x);
            res.history.push_back(next);
            res.sweeps = sweep + 1;
            const bool done = std::abs(next - crit) <= options.tol * std::max(std::abs(crit), 1e-300);
            crit = next;
            if (done) break;
        }
    }

    // Canonical column order and signs, applied to T so a_rot = a * t holds exactly.
    Matrix rotated = a * res.t;
    std::vector<Index> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), Index{0});
    const Vector ss = rotated.colwise().squaredNorm();
    std::stable_sort(order.begin(), order.end(), [&](Index l, Index r) { return ss(l) > ss(r); });
    Matrix t(k, k);
    for (Index c = 0; c < k; ++c) t.col(c) = res.t.col(order[static_cast<std::size_t>(c)]);
    rotated = a * t;
    for (Index c = 0; c < k; ++c) {
        Index arg = 0;
        rotated.col(c).cwiseAbs().maxCoeff(&arg);
        if (rotated(arg, c) < 0.0) t.col(c) *= -1.0;
    }
    res.t = std::move(t);
    res.a_rot = a * res.t;
    res.criterion_value = varimax_criterion(h.cwiseInverse().asDiagonal() * res.a_rot);
    return res;
}

Matrix factor_scores(const Matrix& a, const BinaryDataset& data) {
    if (a.rows() != data.n_items()) throw InputError("factor_scores: loading matrix does not match the data");
    return data.responses() * a;
}

ScaleKey read_scale_key(std::istream& in, Index n_items) {
    ScaleKey key;
    key.scale_of_item.assign(static_cast<std::size_t>(n_items), -1);
    key.reverse_scored.assign(static_cast<std::size_t>(n_items), false);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        const std::string where = "scale key line " + std::to_string(line_no);
        if (fields.size() < 2 || fields.size() > 3) throw InputError(where + ": expected item_index,scale_label,reverse_flag");
        long item = 0;
        try {
            std::size_t used = 0;
            item = std::stol(fields[0], &used);
            if (used != fields[0].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            if (line_no == 1) continue;  // header
            throw InputError(where + ": item index '" + fields[0] + "' is not an integer");
        }
        if (item < 1 || item > n_items)
            throw InputError(where + ": item index " + std::to_string(item) + " outside 1.." + std::to_string(n_items));
        const auto idx = static_cast<std::size_t>(item - 1);
        if (key.scale_of_item[idx] != -1) throw InputError(where + ": item " + std::to_string(item) + " assigned twice");
        const std::string& label = fields[1];
        if (label.empty()) throw InputError(where + ": empty scale label");
        auto it = std::find(key.labels.begin(), key.labels.end(), label);
        if (it == key.labels.end()) {
            key.labels.push_back(label);
            it = key.labels.end() - 1;
        }
        key.scale_of_item[idx] = static_cast<int>(it - key.labels.begin());
        if (fields.size() == 3) {
            const std::string& r = fields[2];
            if (r == "1" || r == "true" || r == "yes")
                key.reverse_scored[idx] = true;
            else if (!(r.empty() || r == "0" || r == "false" || r == "no"))
                throw InputError(where + ": reverse_flag '" + r + "' is not 0/1");
        }
    }
    return key;
}

double pearson(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
    if (x.size() != y.size() || x.size() < 2) return kUndefined;
    const Vector dx = x.array() - x.mean();
    const Vector dy = y.array() - y.mean();
    const double sxx = dx.squaredNorm();
    const double syy = dy.squaredNorm();
    if (sxx <= 0.0 || syy <= 0.0) return kUndefined;
    return dx.dot(dy) / std::sqrt(sxx * syy);
}

Matrix scale_correlations(const Matrix& scores, const ScaleKey& key, const BinaryDataset& data) {
    if (key.n_items() != data.n_items()) throw InputError("scale key does not match the number of items");
    if (scores.rows() != data.n_subjects()) throw InputError("score matrix does not match the number of subjects");
    const Index n_scales = static_cast<Index>(key.labels.size());
    Matrix totals = Matrix::Zero(data.n_subjects(), n_scales);
    std::vector<int> counts(static_cast<std::size_t>(n_scales), 0);
    for (Index i = 0; i < data.n_items(); ++i) {
        const int sc = key.scale_of_item[static_cast<std::size_t>(i)];
        if (sc < 0) continue;
        totals.col(sc) += data.responses().col(i);
        ++counts[static_cast<std::size_t>(sc)];
    }
    for (Index s = 0; s < n_scales; ++s)
        if (counts[static_cast<std::size_t>(s)] == 0) throw InputError("scale '" + key.labels[static_cast<std::size_t>(s)] + "' has no items");
    Matrix out(scores.cols(), n_scales);
    for (Index k = 0; k < scores.cols(); ++k)
        for (Index s = 0; s < n_scales; ++s) out(k, s) = pearson(scores.col(k), totals.col(s));
    return out;
}

namespace {

struct CliqueSearch {
    std::vector<std::vector<char>> adj;
    std::vector<std::vector<Index>> nbrs;
    Index min_size = 1;
    std::vector<Clique> found;

    void expand(Clique& r, std::vector<Index> p, std::vector<Index> x) {
        if (p.empty() && x.empty()) {
            if (static_cast<Index>(r.size()) >= min_size) {
                Clique c = r;
                std::sort(c.begin(), c.end());
                found.push_back(std::move(c));
            }
            return;
        }
        // Pivot: vertex of P u X with the most neighbours in P.
        Index pivot = -1;
        std::size_t best = 0;
        for (const auto* set : {&p, &x}) {
            for (Index u : *set) {
                std::size_t cnt = 0;
                for (Index v : p) cnt += adj[u][v] ? 1 : 0;
                if (pivot < 0 || cnt > best) {
                    pivot = u;
                    best = cnt;
                }
            }
        }
        std::vector<Index> candidates;
        for (Index v : p)
            if (!adj[pivot][v]) candidates.push_back(v);
        for (Index v : candidates) {
            std::vector<Index> p2, x2;
            for (Index w : p)
                if (adj[v][w]) p2.push_back(w);
            for (Index w : x)
                if (adj[v][w]) x2.push_back(w);
            r.push_back(v);
            expand(r, std::move(p2), std::move(x2));
            r.pop_back();
            p.erase(std::find(p.begin(), p.end(), v));
            x.push_back(v);
        }
    }
};

}  // namespace

std::vector<Clique> maximal_cliques(const EdgeList& edges, Index n_vertices, Index min_size) {
    if (n_vertices < 0) throw InputError("maximal_cliques: negative vertex count");
    CliqueSearch search;
    search.min_size = min_size;
    search.adj.assign(static_cast<std::size_t>(n_vertices), std::vector<char>(static_cast<std::size_t>(n_vertices), 0));
    for (const auto& [a, b] : edges) {
        if (a < 0 || b < 0 || a >= n_vertices || b >= n_vertices || a == b)
            throw InputError("maximal_cliques: edge (" + std::to_string(a) + ", " + std::to_string(b) + ") is invalid");
        search.adj[a][b] = 1;
        search.adj[b][a] = 1;
    }
    std::vector<Index> all(static_cast<std::size_t>(n_vertices));
    std::iota(all.begin(), all.end(), Index{0});
    Clique r;
    search.expand(r, all, {});
    std::sort(search.found.begin(), search.found.end());
    return search.found;
}

std::vector<CliqueSummary> clique_report(const Matrix& s, Index min_size) {
    require_symmetric(s, "clique_report");
    std::vector<CliqueSummary> out;
    for (auto& c : maximal_cliques(support_edges(s), s.rows(), min_size)) {
        CliqueSummary cs;
        for (std::size_t a = 0; a < c.size(); ++a)
            for (std::size_t b = a + 1; b < c.size(); ++b) cs.s_sum += s(c[a], c[b]);
        cs.vertices = std::move(c);
        out.push_back(std::move(cs));
    }
    std::stable_sort(out.begin(), out.end(), [](const CliqueSummary& l, const CliqueSummary& r) { return l.s_sum > r.s_sum; });
    return out;
}

void write_clique_report(std::ostream& os, const std::vector<CliqueSummary>& report) {
    os << "# size\ts_sum\titems (1-based)\n";
    os << std::setprecision(6);
    for (const auto& c : report) {
        os << c.vertices.size() << '\t' << c.s_sum << '\t';
        for (std::size_t i = 0; i < c.vertices.size(); ++i) os << (i ? " " : "") << c.vertices[i] + 1;
        os << '\n';
    }
}

}  // namespace flag
