#include "flag/core_model.hpp"

namespace flag {

namespace {

void check_dims(Index j_matrix, const BinaryDataset& data) {
    if (j_matrix != data.n_items())
        throw InputError("dimension mismatch: matrix has " + std::to_string(j_matrix) + " items, data has " +
                         std::to_string(data.n_items()));
}

void check_subjects(const BinaryDataset& data) {
    if (data.n_subjects() < 1) throw InputError("dataset has no subjects");
}

// Elementwise softplus(eta) and logistic(eta) from a single exp. Works on
// whole arrays so Eigen can vectorize the transcendental calls.
template <typename Derived>
void softplus_and_logistic(const Eigen::ArrayBase<Derived>& eta, Eigen::ArrayXXd& sp, Eigen::ArrayXXd& p) {
    const Eigen::ArrayXXd e = (-eta.abs()).exp();
    const Eigen::ArrayXXd one_plus = 1.0 + e;
    sp = eta.max(0.0) + one_plus.log();
    p = (eta >= 0.0).select(one_plus.inverse(), e / one_plus);
}

}  // namespace

double conditional_prob(const CombinedMatrix& m, const Eigen::Ref<const Vector>& x, Index j) {
    const Matrix& mm = m.matrix();
    const Index n = mm.rows();
    if (x.size() != n) throw InputError("response vector length does not match M");
    if (j < 0 || j >= n) throw InputError("item index out of range");
    for (Index i = 0; i < n; ++i)
        if (x(i) != 0.0 && x(i) != 1.0) throw InputError("response vector is not binary");
    double eta = 0.5 * mm(j, j);
    for (Index i = 0; i < n; ++i)
        if (i != j) eta += mm(i, j) * x(i);
    return logistic(eta);
}

Matrix linear_predictors(const Matrix& m, const BinaryDataset& data) {
    check_dims(m.rows(), data);
    Matrix off = m;
    off.diagonal().setZero();
    Matrix eta = data.responses() * off;
    eta.rowwise() += 0.5 * m.diagonal().transpose();
    return eta;
}

double log_pseudo_likelihood(const CombinedMatrix& m, const BinaryDataset& data) {
    if (data.n_subjects() == 0) {
        check_dims(m.n_items(), data);
        return 0.0;
    }
    return -static_cast<double>(data.n_subjects()) * smooth_loss(m.matrix(), data);
}

double log_pseudo_likelihood(const FlagParams& params, const BinaryDataset& data) {
    return log_pseudo_likelihood(CombinedMatrix(params), data);
}

double smooth_loss(const Matrix& m, const BinaryDataset& data) {
    check_subjects(data);
    const Matrix eta = linear_predictors(m, data);
    const Matrix& x = data.responses();
    // -log P(x | eta) = softplus(eta) - x * eta
    const Eigen::ArrayXXd a = eta.array();
    const double sp = (a.max(0.0) + (1.0 + (-a.abs()).exp()).log()).sum();
    return (sp - x.cwiseProduct(eta).sum()) / static_cast<double>(data.n_subjects());
}

Matrix smooth_loss_gradient(const Matrix& m, const BinaryDataset& data) {
    check_subjects(data);
    const Matrix eta = linear_predictors(m, data);
    Eigen::ArrayXXd sp, p;
    softplus_and_logistic(eta.array(), sp, p);
    const Matrix resid = data.responses() - p.matrix();
    const double inv_n = 1.0 / static_cast<double>(data.n_subjects());
    Matrix g = -inv_n * (data.responses().transpose() * resid);
    g.diagonal() = -0.5 * inv_n * resid.colwise().sum().transpose();
    return g;
}

Matrix grad_h(const CombinedMatrix& m, const BinaryDataset& data) {
    const Matrix g = smooth_loss_gradient(m.matrix(), data);
    Matrix sym = g + g.transpose();
    sym.diagonal() = g.diagonal();
    return sym;
}

double column_loss(const BinaryDataset& data, Index j, const Eigen::Ref<const Vector>& col, Vector* grad) {
    const Matrix& x = data.responses();
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    Vector eta = x * col;
    eta.array() += (0.5 - x.col(j).array()) * col(j);
    Eigen::ArrayXXd sp, p;
    softplus_and_logistic(eta.array(), sp, p);
    const double value = sp.sum() - x.col(j).dot(eta);
    if (grad != nullptr) {
        const Vector resid = x.col(j) - p.matrix();
        *grad = -inv_n * (x.transpose() * resid);
        (*grad)(j) = -0.5 * inv_n * resid.sum();
    }
    return value * inv_n;
}

}  // namespace flag
