#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flag {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised for malformed or inconsistent caller input (bad shapes, non-binary
/// entries, asymmetric matrices, out-of-range indices).
class InputError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Unordered item pair, stored with first < second (0-based).
using Edge = std::pair<Index, Index>;
using EdgeList = std::vector<Edge>;

/// Relative symmetry tolerance applied to every matrix that must be symmetric.
inline constexpr double kSymmetryTol = 1e-10;

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& m, double rel_tol = kSymmetryTol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

template <typename Derived>
void require_symmetric(const Eigen::MatrixBase<Derived>& m, const char* what) {
    if (m.rows() != m.cols())
        throw InputError(std::string(what) + ": matrix is not square");
    if (m.size() > 0 && !is_symmetric(m))
        throw InputError(std::string(what) + ": matrix is not symmetric");
}

template <typename Derived>
Matrix symmetrized(const Eigen::MatrixBase<Derived>& m) {
    return 0.5 * (m + m.transpose());
}

/// Off-diagonal nonzero pattern of a symmetric matrix, upper triangle, sorted.
EdgeList support_edges(const Matrix& s);

/// N x J matrix of 0/1 responses plus cached sufficient statistics.
///
/// Responses are stored as doubles so that linear predictors for every item are
/// a single dense product.
class BinaryDataset {
  public:
    BinaryDataset() = default;

    /// Validates that every entry is exactly 0 or 1 and that J >= 2.
    explicit BinaryDataset(Matrix responses);

    Index n_subjects() const { return x_.rows(); }
    Index n_items() const { return x_.cols(); }
    const Matrix& responses() const { return x_; }

    /// X^T X.
    const Matrix& gram() const { return gram_; }
    const Vector& column_sums() const { return col_sums_; }

    bool operator==(const BinaryDataset& other) const { return x_ == other.x_; }

  private:
    Matrix x_;
    Matrix gram_;
    Vector col_sums_;
};

/// Latent part L (PSD) and graphical part S (symmetric).
class FlagParams {
  public:
    FlagParams() = default;
    FlagParams(Matrix latent, Matrix graph);

    static FlagParams zeros(Index j) { return FlagParams(Matrix::Zero(j, j), Matrix::Zero(j, j)); }

    const Matrix& latent() const { return l_; }
    const Matrix& graph() const { return s_; }
    Index n_items() const { return l_.rows(); }
    Matrix combined() const { return l_ + s_; }

  private:
    Matrix l_;
    Matrix s_;
};

/// M = L + S, symmetric.
class CombinedMatrix {
  public:
    CombinedMatrix() = default;
    explicit CombinedMatrix(Matrix m);
    explicit CombinedMatrix(const FlagParams& p) : CombinedMatrix(p.combined()) {}

    const Matrix& matrix() const { return m_; }
    Index n_items() const { return m_.rows(); }

  private:
    Matrix m_;
};

/// J x K loading matrix with L = A A^T.
class LoadingMatrix {
  public:
    LoadingMatrix() = default;
    explicit LoadingMatrix(Matrix a) : a_(std::move(a)) {}

    const Matrix& matrix() const { return a_; }
    Index n_items() const { return a_.rows(); }
    Index n_factors() const { return a_.cols(); }
    Matrix latent() const { return a_ * a_.transpose(); }

  private:
    Matrix a_;
};

}  // namespace flag
