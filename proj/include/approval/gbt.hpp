#ifndef APPROVAL_GBT_HPP
#define APPROVAL_GBT_HPP

#include "approval/adaboost.hpp"
#include "approval/common.hpp"

#include <string>
#include <vector>

namespace approval
{

struct GbtConfig
{
    int depth = 6;
    int rounds = 200;
    double learning_rate = 0.1;
    double lambda = 1.0;           // L2 on leaf values
    double min_child_weight = 1.0; // minimum hessian sum per child
    int max_bins = 255;
    std::uint64_t seed = 0; // recorded; training has no random step
};

/// Regression tree whose leaves carry additive margin contributions
/// (learning rate already applied).
struct RegressionTree
{
    std::vector<TreeNode> nodes;

    template <typename Row>
    double value(const Row& x) const
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

struct BoostedModel
{
    static constexpr int format_version = 1;

    std::string scope = "global"; // "global" or a subreddit id
    std::vector<std::string> features;
    GbtConfig config;
    double base_score = 0.0; // prior log-odds
    std::vector<RegressionTree> trees;
    std::vector<double> training_loss; // mean log-loss after each round
    std::size_t training_rows = 0;

    Vector margin(const Eigen::Ref<const Matrix>& x) const;
    Vector predict_proba(const Eigen::Ref<const Matrix>& x) const;

    std::string to_json() const;
    static BoostedModel from_json(const std::string& text);
};

/// Logistic-loss gradient boosting with histogram splits (quantile bins)
/// and Newton leaf values. Single-class labels raise DegenerateLabels.
BoostedModel train_gbt(const Eigen::Ref<const Matrix>& x, const std::vector<bool>& y, const GbtConfig& config,
                       std::vector<std::string> features = {}, std::string scope = "global");

} // namespace approval

#endif // APPROVAL_GBT_HPP
