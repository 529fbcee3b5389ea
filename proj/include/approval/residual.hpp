#ifndef APPROVAL_RESIDUAL_HPP
#define APPROVAL_RESIDUAL_HPP

#include "approval/feature_table.hpp"
#include "approval/lexicon.hpp"

#include <map>
#include <string>
#include <vector>

namespace approval
{

struct ResidualFit
{
    std::string umbrella;
    double intercept = 0.0;
    std::map<std::string, double> weights;
    std::vector<std::string> dropped_children; // collinear, removed before the refit
    std::string residual_column;               // "other_<umbrella>"
};

/// OLS of x on [1, children] with pivoted QR; collinear children are
/// reported through `dropped` (indices into the columns of `children`).
template <typename DerivedY, typename DerivedX>
Vector ols_with_intercept(const Eigen::MatrixBase<DerivedY>& y, const Eigen::MatrixBase<DerivedX>& children,
                          std::vector<Index>& dropped, double rel_tol = 1e-10)
{
    const Index n = y.rows();
    Matrix design(n, children.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(children.cols()) = children;
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    qr.setThreshold(rel_tol);
    const Index rank = qr.rank();
    std::vector<Index> keep;
    for (Index k = 0; k < rank; ++k)
        keep.push_back(qr.colsPermutation().indices()(k));
    std::sort(keep.begin(), keep.end());
    dropped.clear();
    for (Index j = 1; j < design.cols(); ++j)
        if (!std::binary_search(keep.begin(), keep.end(), j))
            dropped.push_back(j - 1);
    if (!std::binary_search(keep.begin(), keep.end(), Index{0}))
        keep.insert(keep.begin(), 0);
    const Matrix reduced = design(Eigen::all, keep);
    const Vector b = reduced.colPivHouseholderQr().solve(y.derived().template cast<double>());
    Vector full = Vector::Zero(design.cols());
    for (std::size_t k = 0; k < keep.size(); ++k)
        full(keep[k]) = b(static_cast<Index>(k));
    return full;
}

/// Replaces each umbrella column by its residual on its children, fitted
/// over `population` rows and applied to every row of the table.
/// Rows with a missing umbrella or child value are excluded from the fit.
std::vector<ResidualFit> fit_residual_umbrellas(FeatureTable& table, const lexicon::LexiconHierarchy& lexicon,
                                                const std::vector<Index>& population);

} // namespace approval

#endif // APPROVAL_RESIDUAL_HPP
