#ifndef APPROVAL_PCA_HPP
#define APPROVAL_PCA_HPP

#include "approval/common.hpp"

#include <Eigen/Eigenvalues>

namespace approval
{

template <typename Scalar = double>
struct PcaModel
{
    using MatrixS = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using VectorS = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    VectorS mean;                     // d
    MatrixS components;               // d x k, orthonormal columns v_k
    VectorS explained_variance_ratio; // k, nonincreasing
    VectorS explained_variance;       // k, population covariance eigenvalues
};

/// Eigendecomposition of the mean-centred population covariance. Each
/// component's sign is fixed so its largest-magnitude loading is positive.
template <typename Derived>
PcaModel<typename Derived::Scalar> fit_pca(const Eigen::MatrixBase<Derived>& x, Index n_components = 10)
{
    using Scalar = typename Derived::Scalar;
    using MatrixS = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Index n = x.rows();
    const Index d = x.cols();
    if (n <= n_components)
        fail(ErrorKind::InsufficientRows, "PCA needs more rows than components");
    if (n_components < 1 || n_components > d)
        fail(ErrorKind::ShapeError, "component count must lie in [1, dimension]");

    PcaModel<Scalar> model;
    model.mean = x.colwise().mean().transpose();
    const MatrixS centred = x.rowwise() - model.mean.transpose();
    MatrixS cov = MatrixS::Zero(d, d);
    cov.template selfadjointView<Eigen::Lower>().rankUpdate(centred.transpose(), Scalar(1) / Scalar(n));
    Eigen::SelfAdjointEigenSolver<MatrixS> eig(cov);
    if (eig.info() != Eigen::Success)
        fail(ErrorKind::NumericError, "covariance eigendecomposition failed");

    const auto values = eig.eigenvalues().reverse().cwiseMax(Scalar(0)).eval();
    const Scalar total = values.sum();
    model.components = eig.eigenvectors().rowwise().reverse().leftCols(n_components);
    for (Index k = 0; k < n_components; ++k)
    {
        Index arg = 0;
        model.components.col(k).cwiseAbs().maxCoeff(&arg);
        if (model.components(arg, k) < Scalar(0))
            model.components.col(k) *= Scalar(-1);
    }
    model.explained_variance = values.head(n_components);
    model.explained_variance_ratio =
        total > Scalar(0) ? (values.head(n_components) / total).eval() : decltype(values.head(n_components).eval())::Zero(n_components);
    return model;
}

/// score(i,k) = (x_i - mean) . v_k
template <typename Derived, typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> pc_scores(const Eigen::MatrixBase<Derived>& x,
                                                                 const PcaModel<Scalar>& model)
{
    if (x.cols() != model.mean.size())
        fail(ErrorKind::ShapeError, "embedding dimension does not match the PCA model");
    return (x.rowwise() - model.mean.transpose()) * model.components;
}

} // namespace approval

#endif // APPROVAL_PCA_HPP
