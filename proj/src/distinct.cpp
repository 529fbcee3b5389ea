#include "approval/distinct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace approval
{

const CommunityCentroid& CentroidReport::find(const std::string& subreddit) const
{
    for (const auto& c : communities)
        if (c.subreddit == subreddit)
            return c;
    fail(ErrorKind::SchemaError, "no centroid for community '" + subreddit + "'");
}

CentroidReport compute_centroids(const Eigen::Ref<const Matrix>& embeddings, const std::vector<std::string>& subreddit,
                                 std::size_t n_per_community, std::uint64_t seed)
{
    if (static_cast<std::size_t>(embeddings.rows()) != subreddit.size())
        fail(ErrorKind::ShapeError, "one community id per embedding row is required");
    std::map<std::string, std::vector<Index>> rows;
    for (Index i = 0; i < embeddings.rows(); ++i)
        if (embeddings.row(i).allFinite())
            rows[subreddit[static_cast<std::size_t>(i)]].push_back(i);

    CentroidReport report;
    report.n_per_community = n_per_community;
    report.seed = seed;
    report.global = Vector::Zero(embeddings.cols());
    std::size_t total = 0;
    for (auto& [sub, idx] : rows)
    {
        CommunityCentroid c;
        c.subreddit = sub;
        c.available = idx.size();
        const std::size_t take = std::min(n_per_community, idx.size());
        Rng rng = make_rng(hash_combine(seed, fnv1a(sub)), 0xce7);
        for (std::size_t k = 0; k < take; ++k)
        {
            const std::size_t j = k + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(idx.size() - k));
            std::swap(idx[k], idx[j]);
        }
        std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
        c.centroid = Vector::Zero(embeddings.cols());
        for (std::size_t k = 0; k < take; ++k)
            c.centroid += embeddings.row(idx[k]).transpose();
        report.global += c.centroid;
        total += take;
        c.sample_size = take;
        if (take > 0)
            c.centroid /= static_cast<double>(take);
        report.communities.push_back(std::move(c));
    }
    if (total == 0)
        fail(ErrorKind::DegenerateCentroid, "no embedded rows");
    report.global /= static_cast<double>(total);
    for (auto& c : report.communities)
    {
        if (c.centroid.norm() == 0.0)
            fail(ErrorKind::DegenerateCentroid, "community '" + c.subreddit + "' has a zero-norm centroid");
        c.distance = cosine_distance(c.centroid, report.global);
    }
    return report;
}

namespace
{

// Modified Lentz evaluation of the continued fraction for I_x(a,b).
double beta_fraction(double a, double b, double x)
{
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-15;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::abs(d) < tiny)
        d = tiny;
    d = 1.0 / d;
    double f = d;
    for (int m = 1; m <= 10000; ++m)
    {
        const double m2 = 2.0 * m;
        double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 + num * d;
        c = 1.0 + num / c;
        if (std::abs(d) < tiny)
            d = tiny;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        f *= d * c;
        num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 + num * d;
        c = 1.0 + num / c;
        if (std::abs(d) < tiny)
            d = tiny;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        f *= delta;
        if (std::abs(delta - 1.0) < eps)
            return f;
    }
    fail(ErrorKind::NumericError, "incomplete beta continued fraction did not converge");
}

} // namespace

double incomplete_beta(double a, double b, double x)
{
    if (!(a > 0.0 && b > 0.0) || !(x >= 0.0 && x <= 1.0))
        fail(ErrorKind::NumericError, "incomplete beta argument out of range");
    if (x == 0.0 || x == 1.0)
        return x;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(log_front) * beta_fraction(a, b, x) / a;
    return 1.0 - std::exp(log_front) * beta_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double df)
{
    if (!std::isfinite(t))
        return std::isnan(t) ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    if (t == 0.0)
        return 1.0;
    return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

WelchResult welch_t(std::span<const double> g, std::span<const double> l)
{
    if (g.size() < 2 || l.size() < 2)
        fail(ErrorKind::InsufficientGroup, "Welch's test needs at least two values per group");
    auto moments = [](std::span<const double> v, double& mean, double& var) {
        mean = 0.0;
        for (double x : v)
            mean += x;
        mean /= static_cast<double>(v.size());
        var = 0.0;
        for (double x : v)
            var += (x - mean) * (x - mean);
        var /= static_cast<double>(v.size() - 1);
    };
    WelchResult r;
    moments(g, r.mean_g, r.var_g);
    moments(l, r.mean_l, r.var_l);
    r.n_g = g.size();
    r.n_l = l.size();
    const double sg = r.var_g / static_cast<double>(r.n_g);
    const double sl = r.var_l / static_cast<double>(r.n_l);
    const double se2 = sg + sl;
    const double diff = r.mean_g - r.mean_l;
    if (se2 <= 0.0)
    {
        r.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        r.df = static_cast<double>(r.n_g + r.n_l - 2);
        r.p = diff == 0.0 ? 1.0 : 0.0;
        return r;
    }
    r.t = diff / std::sqrt(se2);
    r.df = se2 * se2 / (sg * sg / static_cast<double>(r.n_g - 1) + sl * sl / static_cast<double>(r.n_l - 1));
    r.p = student_t_two_sided(r.t, r.df);
    return r;
}

} // namespace approval
