#ifndef APPROVAL_DISTINCT_HPP
#define APPROVAL_DISTINCT_HPP

#include "approval/common.hpp"
#include "approval/special.hpp"

#include <algorithm>
#include <span>
#include <string>
#include <vector>

namespace approval
{

struct CommunityCentroid
{
    std::string subreddit;
    Vector centroid;
    double distance = 0.0; // 1 - cos(mu_s, mu_global), in [0, 2]
    std::size_t sample_size = 0;
    std::size_t available = 0;
};

struct CentroidReport
{
    Vector global; // mean over the union of the samples
    std::vector<CommunityCentroid> communities;
    std::size_t n_per_community = 2000;
    std::uint64_t seed = 0;

    const CommunityCentroid& find(const std::string& subreddit) const;
};

/// Samples up to `n_per_community` rows per community without replacement
/// (rows with a non-finite embedding are skipped). Zero-norm centroids raise
/// DegenerateCentroid.
CentroidReport compute_centroids(const Eigen::Ref<const Matrix>& embeddings, const std::vector<std::string>& subreddit,
                                 std::size_t n_per_community = 2000, std::uint64_t seed = 0);

template <typename DerivedA, typename DerivedB>
double cosine_distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b)
{
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0)
        fail(ErrorKind::DegenerateCentroid, "cosine distance of a zero vector");
    const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
    return 1.0 - c;
}

struct WelchResult
{
    double mean_g = 0.0;
    double mean_l = 0.0;
    double var_g = 0.0; // sample variances
    double var_l = 0.0;
    std::size_t n_g = 0;
    std::size_t n_l = 0;
    double t = 0.0;
    double df = 0.0;
    double p = 1.0; // two-sided
};

/// Welch's unequal-variance t-test. Groups below 2 values raise InsufficientGroup.
WelchResult welch_t(std::span<const double> group_g, std::span<const double> group_l);

} // namespace approval

#endif // APPROVAL_DISTINCT_HPP
