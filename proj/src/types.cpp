#include "flag/types.hpp"

#include <Eigen/Eigenvalues>

namespace flag {

EdgeList support_edges(const Matrix& s) {
    EdgeList edges;
    for (Index i = 0; i < s.rows(); ++i)
        for (Index j = i + 1; j < s.cols(); ++j)
            if (s(i, j) != 0.0) edges.emplace_back(i, j);
    return edges;
}

BinaryDataset::BinaryDataset(Matrix responses) : x_(std::move(responses)) {
    if (x_.cols() < 2) throw InputError("dataset needs at least 2 items");
    for (Index i = 0; i < x_.rows(); ++i)
        for (Index j = 0; j < x_.cols(); ++j) {
            const double v = x_(i, j);
            if (v != 0.0 && v != 1.0)
                throw InputError("response (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                                 ") is not 0 or 1");
        }
    gram_ = x_.transpose() * x_;
    col_sums_ = x_.colwise().sum().transpose();
}

FlagParams::FlagParams(Matrix latent, Matrix graph) : l_(std::move(latent)), s_(std::move(graph)) {
    if (l_.rows() != s_.rows() || l_.cols() != s_.cols())
        throw InputError("L and S must have the same shape");
    require_symmetric(l_, "L");
    require_symmetric(s_, "S");
    if (l_.size() == 0) return;
    // Exact symmetry is an invariant of the type.
    l_ = symmetrized(l_);
    s_ = symmetrized(s_);
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(l_, Eigen::EigenvaluesOnly).eigenvalues();
    const double floor = -1e-8 * std::max(1.0, ev.maxCoeff());
    if (ev.minCoeff() < floor) throw InputError("L is not positive semidefinite");
}

CombinedMatrix::CombinedMatrix(Matrix m) : m_(std::move(m)) {
    require_symmetric(m_, "M");
}

}  // namespace flag
