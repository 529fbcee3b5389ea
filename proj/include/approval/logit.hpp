#ifndef APPROVAL_LOGIT_HPP
#define APPROVAL_LOGIT_HPP

#include "approval/design.hpp"

#include <string>
#include <vector>

namespace approval
{

struct LogitOptions
{
    double ridge = 1e-8; // on non-FE, non-intercept coefficients
    double tol = 1e-8;   // gradient max-norm
    int max_iter = 100;
    bool throw_on_max_iter = true;
};

struct IterationTrace
{
    int iteration = 0;
    double penalized_loglik = 0.0;
    double gradient_max = 0.0;
    double step_scale = 1.0;
};

struct FitResult
{
    std::vector<std::string> names;
    std::vector<TermFamily> families;
    Vector beta;
    Matrix model_cov;  // inverse penalized Hessian
    Matrix robust_cov; // filled by cluster_robust_cov
    Vector fitted;     // p_hat
    double penalized_loglik = 0.0;
    bool converged = false;
    bool separation_warning = false;
    std::vector<IterationTrace> trace;
    std::vector<std::string> dropped;
    double ridge = 0.0;
    std::size_t rows = 0;
};

/// Diagonal penalty mask: 1 for penalized coefficients.
Vector ridge_mask(const SparseDesign& design);

double penalized_loglik(const SparseDesign& design, const Vector& beta, double ridge);
Vector penalized_gradient(const SparseDesign& design, const Vector& beta, double ridge);

/// Newton / IRLS with step-halving. Non-finite inputs raise NumericError;
/// hitting max_iter raises MaxIterExceeded (or returns unconverged when
/// throw_on_max_iter is false).
FitResult fit_logit(const SparseDesign& design, const LogitOptions& options = {});

/// (H^-1) (sum_g u_g u_g') (H^-1) * G/(G-1), u_g = sum_{i in g} x_i (y_i - p_i).
/// H is the penalized Hessian used by the fit. Fewer than 2 clusters raises
/// SingleClusterError.
Matrix cluster_robust_cov(const SparseDesign& design, const FitResult& fit);

} // namespace approval

#endif // APPROVAL_LOGIT_HPP
