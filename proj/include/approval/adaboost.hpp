#ifndef APPROVAL_ADABOOST_HPP
#define APPROVAL_ADABOOST_HPP

#include "approval/common.hpp"
#include "approval/feature_table.hpp"

#include <string>
#include <vector>

namespace approval
{

struct TreeNode
{
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;  // x[feature] <= threshold
    int right = -1; // x[feature] >  threshold
    double value = 0.0;
};

/// Classification tree voting +1 / -1.
struct VoteTree
{
    std::vector<TreeNode> nodes;

    template <typename Row>
    double vote(const Row& x) const
    {
        int i = 0;
        while (nodes[static_cast<std::size_t>(i)].feature >= 0)
        {
            const auto& n = nodes[static_cast<std::size_t>(i)];
            i = x(n.feature) <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }
};

struct AdaBoostConfig
{
    int rounds = 100;
    int depth = 2;
    double learning_rate = 1.0;
    std::uint64_t seed = 0;
};

/// Discrete two-class SAMME. margin(x) = 1/2 * sum_t alpha_t h_t(x),
/// P(y = 1 | x) = 1 / (1 + exp(-2 margin)).
struct AdaBoostModel
{
    AdaBoostConfig config;
    std::vector<std::string> features;
    std::vector<VoteTree> trees;
    std::vector<double> alphas;
    std::vector<double> training_error; // weighted error per round

    Vector margin(const Eigen::Ref<const Matrix>& x) const;
    Vector predict_proba(const Eigen::Ref<const Matrix>& x) const;
};

AdaBoostModel fit_adaboost(const Eigen::Ref<const Matrix>& x, const std::vector<bool>& y,
                           const AdaBoostConfig& config, std::vector<std::string> feature_names = {});

struct RiskModel
{
    std::string subreddit;
    std::string outcome;
    AdaBoostModel ensemble;
};

/// Trains on `rows` of `table` using `columns`, which must all carry the
/// Covariate role (ProvenanceError otherwise). Fewer than 20 rows or a single
/// class raises SubredditSkipped.
RiskModel fit_risk_model(const FeatureTable& table, const std::vector<std::string>& columns,
                         const std::vector<Index>& rows, const std::vector<bool>& labels,
                         const std::string& subreddit, const std::string& outcome, const AdaBoostConfig& config);

} // namespace approval

#endif // APPROVAL_ADABOOST_HPP
