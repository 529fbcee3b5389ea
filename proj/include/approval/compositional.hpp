#ifndef APPROVAL_COMPOSITIONAL_HPP
#define APPROVAL_COMPOSITIONAL_HPP

#include "approval/common.hpp"

#include <cmath>

namespace approval
{

constexpr double clr_epsilon = 1e-6;

/// Row-wise centered log-ratio: log((p + eps) / g) with g the geometric mean
/// of the shifted row. Rows are compositions; a negative part, or a zero part
/// with eps = 0, throws InvalidComposition.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
clr_transform(const Eigen::MatrixBase<Derived>& proportions, typename Derived::Scalar epsilon = clr_epsilon)
{
    using Scalar = typename Derived::Scalar;
    if ((proportions.array() < Scalar(0)).any())
        fail(ErrorKind::InvalidComposition, "composition has a negative part");
    const auto shifted = (proportions.array() + epsilon).eval();
    if ((shifted <= Scalar(0)).any())
        fail(ErrorKind::InvalidComposition, "zero part needs epsilon > 0");
    auto logs = shifted.log().matrix().eval();
    const auto log_g = logs.rowwise().mean().eval();
    logs.colwise() -= log_g;
    return logs;
}

template <typename Scalar, int Rows, int Options, int MaxRows, int MaxCols>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> clr_transform(const Eigen::Matrix<Scalar, Rows, 1, Options, MaxRows, MaxCols>& p,
                                                       Scalar epsilon = clr_epsilon)
{
    return clr_transform(p.transpose(), epsilon).transpose();
}

/// Removes coordinate `dropped` (the designated reference part) before model entry.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> drop_coordinate(
    const Eigen::MatrixBase<Derived>& clr, Index dropped)
{
    if (dropped < 0 || dropped >= clr.cols())
        fail(ErrorKind::ShapeError, "dropped coordinate out of range");
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(clr.rows(), clr.cols() - 1);
    out.leftCols(dropped) = clr.leftCols(dropped);
    out.rightCols(clr.cols() - 1 - dropped) = clr.rightCols(clr.cols() - 1 - dropped);
    return out;
}

/// One post's topic composition and its transform.
struct TopicMixture
{
    Vector proportions;
    Vector clr;
    double epsilon = clr_epsilon;
    Index dropped_index = 0;
};

inline TopicMixture make_topic_mixture(const Vector& proportions, double epsilon = clr_epsilon)
{
    TopicMixture m;
    m.proportions = proportions;
    m.clr = clr_transform(proportions, epsilon);
    m.epsilon = epsilon;
    m.dropped_index = proportions.size() - 1;
    return m;
}

} // namespace approval

#endif // APPROVAL_COMPOSITIONAL_HPP
