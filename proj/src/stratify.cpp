#include "approval/stratify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace approval
{

DecileAssignment assign_deciles(std::span<const double> scores, std::span<const std::string> post_ids)
{
    const std::size_t n = scores.size();
    if (post_ids.size() != n)
        fail(ErrorKind::ShapeError, "one post id per score is required");
    if (n < 10)
        fail(ErrorKind::SubredditSkipped, "fewer than 10 candidates to bin into deciles");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b])
            return scores[a] < scores[b];
        return post_ids[a] < post_ids[b];
    });
    DecileAssignment out;
    out.decile.resize(n);
    for (std::size_t r = 0; r < n; ++r)
        out.decile[order[r]] = static_cast<int>(r * 10 / n) + 1;
    out.degenerate = std::all_of(scores.begin(), scores.end(), [&](double s) { return s == scores[0]; });
    return out;
}

double smd(std::span<const double> t, std::span<const double> c)
{
    return smd(Eigen::Map<const Vector>(t.data(), static_cast<Index>(t.size())),
               Eigen::Map<const Vector>(c.data(), static_cast<Index>(c.size())));
}

std::string reason_text(unsigned reasons)
{
    std::string out;
    if (reasons & OverlapFail)
        out = "overlap_fail";
    if (reasons & BalanceFail)
        out += out.empty() ? "balance_fail" : ";balance_fail";
    return out;
}

std::vector<StratumDiagnostics> diagnose_strata(const Eigen::Ref<const Matrix>& z, std::span<const std::string> subreddit,
                                                std::span<const int> decile, const std::vector<bool>& label)
{
    const std::size_t n = static_cast<std::size_t>(z.rows());
    if (subreddit.size() != n || decile.size() != n || label.size() != n)
        fail(ErrorKind::ShapeError, "stratum inputs must align with covariate rows");
    std::map<std::pair<std::string, int>, std::pair<std::vector<Index>, std::vector<Index>>> cells;
    for (std::size_t i = 0; i < n; ++i)
    {
        auto& cell = cells[{subreddit[i], decile[i]}];
        (label[i] ? cell.first : cell.second).push_back(static_cast<Index>(i));
    }
    std::vector<StratumDiagnostics> out;
    for (const auto& [key, groups] : cells)
    {
        StratumDiagnostics d;
        d.subreddit = key.first;
        d.decile = key.second;
        d.positives = static_cast<int>(groups.first.size());
        d.controls = static_cast<int>(groups.second.size());
        if (!groups.first.empty() && !groups.second.empty())
        {
            for (Index j = 0; j < z.cols(); ++j)
                d.smd.push_back(smd(z(groups.first, j), z(groups.second, j)));
            d.mean_smd = std::accumulate(d.smd.begin(), d.smd.end(), 0.0) / static_cast<double>(d.smd.size());
        }
        else
        {
            d.smd.assign(static_cast<std::size_t>(z.cols()), std::numeric_limits<double>::quiet_NaN());
            d.mean_smd = std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<StratumDiagnostics> gate_strata(std::vector<StratumDiagnostics> strata, double threshold, int min_each)
{
    int kept = 0;
    for (auto& s : strata)
    {
        s.reasons = ReasonNone;
        if (s.positives < min_each || s.controls < min_each)
            s.reasons |= OverlapFail;
        if (!(s.mean_smd <= threshold))
            s.reasons |= BalanceFail;
        s.retained = s.reasons == ReasonNone;
        kept += s.retained ? 1 : 0;
    }
    if (kept == 0)
    {
        std::string dump = "no stratum passed the overlap and balance gates (threshold " + format_fixed(threshold, 2) +
                           ", " + std::to_string(strata.size()) + " strata)";
        for (std::size_t i = 0; i < strata.size() && i < 20; ++i)
            dump += "\n  " + strata[i].subreddit + "/d" + std::to_string(strata[i].decile) + " pos=" +
                    std::to_string(strata[i].positives) + " ctl=" + std::to_string(strata[i].controls) +
                    " mean_smd=" + format_fixed(strata[i].mean_smd, 4) + " " + reason_text(strata[i].reasons);
        fail(ErrorKind::PipelineHalt, dump);
    }
    return strata;
}

BalanceSummary summarize_balance(const Eigen::Ref<const Matrix>& z, const std::vector<bool>& label,
                                 const std::vector<StratumDiagnostics>& strata, std::vector<std::string> covariates)
{
    BalanceSummary b;
    b.covariates = std::move(covariates);
    std::vector<Index> pos, ctl;
    for (std::size_t i = 0; i < label.size(); ++i)
        (label[i] ? pos : ctl).push_back(static_cast<Index>(i));
    b.unmatched.assign(static_cast<std::size_t>(z.cols()), 0.0);
    b.stratified.assign(static_cast<std::size_t>(z.cols()), 0.0);
    for (Index j = 0; j < z.cols(); ++j)
        b.unmatched[static_cast<std::size_t>(j)] = smd(z(pos, j), z(ctl, j));
    b.strata_total = static_cast<int>(strata.size());
    for (const auto& s : strata)
        if (s.retained)
        {
            ++b.strata_retained;
            for (std::size_t j = 0; j < s.smd.size(); ++j)
                b.stratified[j] += s.smd[j];
        }
    for (auto& v : b.stratified)
        v = b.strata_retained > 0 ? v / b.strata_retained : std::numeric_limits<double>::quiet_NaN();
    const double k = static_cast<double>(z.cols());
    b.unmatched_mean = std::accumulate(b.unmatched.begin(), b.unmatched.end(), 0.0) / k;
    b.stratified_mean = std::accumulate(b.stratified.begin(), b.stratified.end(), 0.0) / k;
    return b;
}

} // namespace approval
