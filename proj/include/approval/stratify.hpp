#ifndef APPROVAL_STRATIFY_HPP
#define APPROVAL_STRATIFY_HPP

#include "approval/common.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace approval
{

struct DecileAssignment
{
    std::vector<int> decile; // 1..10, aligned with the input
    bool degenerate = false; // every score identical
};

/// Equal-count binning by rank: after sorting by (score, post_id) the row at
/// rank r (0-based) of n goes to decile floor(10 r / n) + 1.
/// Fewer than 10 candidates raises SubredditSkipped.
DecileAssignment assign_deciles(std::span<const double> scores, std::span<const std::string> post_ids);

/// |mean_t - mean_c| / sqrt((var_t + var_c) / 2) with population variances.
template <typename DerivedT, typename DerivedC>
double smd(const Eigen::DenseBase<DerivedT>& t, const Eigen::DenseBase<DerivedC>& c)
{
    if (t.size() == 0 || c.size() == 0)
        fail(ErrorKind::EmptyGroup, "SMD needs two nonempty groups");
    const double mt = t.template cast<double>().mean();
    const double mc = c.template cast<double>().mean();
    const double vt = (t.template cast<double>().array() - mt).square().mean();
    const double vc = (c.template cast<double>().array() - mc).square().mean();
    const double diff = std::abs(mt - mc);
    const double pooled = std::sqrt((vt + vc) / 2.0);
    if (pooled <= 0.0)
        return diff <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return diff / pooled;
}

double smd(std::span<const double> t, std::span<const double> c);

enum StratumReason : unsigned
{
    ReasonNone = 0,
    OverlapFail = 1u << 0,
    BalanceFail = 1u << 1,
};

std::string reason_text(unsigned reasons);

struct StratumDiagnostics
{
    std::string subreddit;
    int decile = 0;
    int positives = 0;
    int controls = 0;
    std::vector<double> smd; // one per covariate
    double mean_smd = 0.0;
    bool retained = false;
    unsigned reasons = ReasonNone;
};

/// Per-(subreddit, decile) SMDs of `z` columns between positives and controls.
/// `rows` select the candidates; `subreddit`, `decile` and `label` align with rows.
std::vector<StratumDiagnostics> diagnose_strata(const Eigen::Ref<const Matrix>& z, std::span<const std::string> subreddit,
                                                std::span<const int> decile, const std::vector<bool>& label);

/// Retains strata with >= min_each positives and controls and mean SMD <= threshold.
/// Zero retained strata raises PipelineHalt.
std::vector<StratumDiagnostics> gate_strata(std::vector<StratumDiagnostics> strata, double threshold = 0.30,
                                            int min_each = 10);

struct BalanceSummary
{
    std::vector<std::string> covariates;
    std::vector<double> unmatched;   // pooled over the whole candidate pool
    std::vector<double> stratified;  // mean over retained strata
    double unmatched_mean = 0.0;
    double stratified_mean = 0.0;
    int strata_total = 0;
    int strata_retained = 0;
};

BalanceSummary summarize_balance(const Eigen::Ref<const Matrix>& z, const std::vector<bool>& label,
                                 const std::vector<StratumDiagnostics>& strata, std::vector<std::string> covariates);

} // namespace approval

#endif // APPROVAL_STRATIFY_HPP
