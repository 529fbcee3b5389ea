#include "approval/logit.hpp"

#include <cmath>

namespace approval
{

namespace
{

double log1pexp(double x)
{
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x)
{
    if (x >= 0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

Vector ridge_mask(const SparseDesign& design)
{
    Vector m = Vector::Zero(design.cols());
    for (Index j = 0; j < design.dense.cols(); ++j)
        if (design.dense_family[static_cast<std::size_t>(j)] != TermFamily::Intercept)
            m(j) = 1.0;
    return m;
}

double penalized_loglik(const SparseDesign& design, const Vector& beta, double ridge)
{
    const Vector eta = design.linear_predictor(beta);
    double ll = 0.0;
    for (Index i = 0; i < eta.size(); ++i)
        ll += design.y(i) * eta(i) - log1pexp(eta(i));
    return ll - 0.5 * ridge * (ridge_mask(design).array() * beta.array().square()).sum();
}

Vector penalized_gradient(const SparseDesign& design, const Vector& beta, double ridge)
{
    const Vector eta = design.linear_predictor(beta);
    const Vector resid = design.y - eta.unaryExpr([](double e) { return sigmoid(e); });
    return design.xt(resid) - ridge * ridge_mask(design).cwiseProduct(beta);
}

FitResult fit_logit(const SparseDesign& design, const LogitOptions& options)
{
    const Index p = design.cols();
    if (!design.dense.allFinite() || !design.y.allFinite() || !design.offset.allFinite())
        fail(ErrorKind::NumericError, "design or response has non-finite values");
    if (design.rows() == 0 || p == 0)
        fail(ErrorKind::InsufficientRows, "empty design");

    FitResult fit;
    fit.names = design.column_names();
    fit.families = design.column_families();
    fit.dropped = design.dropped;
    fit.ridge = options.ridge;
    fit.rows = static_cast<std::size_t>(design.rows());
    fit.separation_warning = design.separation_flag;

    const Vector mask = ridge_mask(design);
    Vector beta = Vector::Zero(p);
    // Start the intercept at the logit of the active-row mean.
    if (!design.dense_family.empty() && design.dense_family[0] == TermFamily::Intercept)
    {
        double pos = 0.0, n = 0.0;
        for (Index i = 0; i < design.rows(); ++i)
            if (design.offset(i) == 0.0)
            {
                pos += design.y(i);
                n += 1.0;
            }
        if (n > 0.0 && pos > 0.0 && pos < n)
            beta(0) = std::log(pos / (n - pos));
    }

    double ll = penalized_loglik(design, beta, options.ridge);
    Matrix hessian;
    for (int iter = 0; iter <= options.max_iter; ++iter)
    {
        const Vector eta = design.linear_predictor(beta);
        const Vector prob = eta.unaryExpr([](double e) { return sigmoid(e); });
        const Vector w = prob.cwiseProduct((Vector::Ones(prob.size()) - prob));
        const Vector grad = design.xt(design.y - prob) - options.ridge * mask.cwiseProduct(beta);
        hessian = design.xtwx(w);
        hessian.diagonal() += options.ridge * mask;
        const double gmax = grad.cwiseAbs().maxCoeff();
        if (!std::isfinite(gmax))
            fail(ErrorKind::NumericError, "non-finite gradient during IRLS");
        if (gmax < options.tol)
        {
            fit.trace.push_back({iter, ll, gmax, 0.0});
            fit.converged = true;
            fit.fitted = prob;
            break;
        }
        if (iter == options.max_iter)
        {
            fit.trace.push_back({iter, ll, gmax, 0.0});
            break;
        }
        Eigen::LDLT<Matrix> ldlt(hessian);
        Vector step = ldlt.solve(grad);
        if (ldlt.info() != Eigen::Success || !step.allFinite())
            step = hessian.completeOrthogonalDecomposition().solve(grad);
        double scale = 1.0;
        Vector candidate = beta + step;
        double ll_new = penalized_loglik(design, candidate, options.ridge);
        while (!(ll_new >= ll - 1e-12 * std::abs(ll)) && scale > 1e-10)
        {
            scale *= 0.5;
            candidate = beta + scale * step;
            ll_new = penalized_loglik(design, candidate, options.ridge);
        }
        fit.trace.push_back({iter, ll, gmax, scale});
        beta = candidate;
        ll = ll_new;
    }

    fit.beta = beta;
    fit.penalized_loglik = ll;
    if (!fit.converged)
    {
        if (options.throw_on_max_iter)
            fail(ErrorKind::MaxIterExceeded, "IRLS did not reach gradient tolerance in " +
                                                 std::to_string(options.max_iter) + " iterations (last max|g| = " +
                                                 format_full(fit.trace.back().gradient_max) + ")");
        fit.fitted = design.linear_predictor(beta).unaryExpr([](double e) { return sigmoid(e); });
    }
    for (Index i = 0; i < design.rows(); ++i)
        if (design.offset(i) == 0.0 && (fit.fitted(i) < 1e-10 || fit.fitted(i) > 1.0 - 1e-10))
            fit.separation_warning = true;
    fit.model_cov = hessian.ldlt().solve(Matrix::Identity(p, p));
    return fit;
}

Matrix cluster_robust_cov(const SparseDesign& design, const FitResult& fit)
{
    const auto g = static_cast<double>(design.cluster_names.size());
    if (design.cluster_names.size() < 2)
        fail(ErrorKind::SingleClusterError, "cluster-robust covariance needs at least two clusters");
    const Matrix u = design.cluster_scores(design.y - fit.fitted);
    const Matrix meat = u.transpose() * u;
    Matrix cov = fit.model_cov * meat * fit.model_cov;
    cov *= g / (g - 1.0);
    return 0.5 * (cov + cov.transpose());
}

} // namespace approval
