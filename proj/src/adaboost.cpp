#include "approval/adaboost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace approval
{

namespace
{

struct SplitChoice
{
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
};

double gini(double w_pos, double w_all)
{
    if (w_all <= 0.0)
        return 0.0;
    const double p = w_pos / w_all;
    return w_all * 2.0 * p * (1.0 - p);
}

class TreeBuilder
{
public:
    TreeBuilder(const Eigen::Ref<const Matrix>& x, const std::vector<bool>& y) : x_(x), y_(y)
    {
        const Index n = x.rows();
        sorted_.resize(static_cast<std::size_t>(x.cols()));
        for (Index f = 0; f < x.cols(); ++f)
        {
            auto& order = sorted_[static_cast<std::size_t>(f)];
            order.resize(static_cast<std::size_t>(n));
            std::iota(order.begin(), order.end(), Index{0});
            std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return x(a, f) < x(b, f); });
        }
        node_of_.assign(static_cast<std::size_t>(n), 0);
    }

    VoteTree build(const std::vector<double>& w, int depth)
    {
        w_ = &w;
        VoteTree tree;
        std::fill(node_of_.begin(), node_of_.end(), 0);
        tree.nodes.push_back({});
        std::vector<int> frontier{0};
        for (int level = 0; level <= depth; ++level)
        {
            std::vector<int> next;
            for (int node : frontier)
            {
                double wp = 0.0, wa = 0.0;
                for (std::size_t i = 0; i < node_of_.size(); ++i)
                    if (node_of_[i] == node)
                    {
                        wa += w[i];
                        wp += y_[i] ? w[i] : 0.0;
                    }
                auto& leaf = tree.nodes[static_cast<std::size_t>(node)];
                leaf.value = wp >= wa - wp ? 1.0 : -1.0;
                if (level == depth || wp <= 0.0 || wp >= wa)
                    continue;
                const SplitChoice s = best_split(node, wp, wa);
                if (s.feature < 0 || s.impurity >= gini(wp, wa) - 1e-15 * wa)
                    continue;
                const int l = static_cast<int>(tree.nodes.size());
                tree.nodes.push_back({});
                tree.nodes.push_back({});
                auto& parent = tree.nodes[static_cast<std::size_t>(node)];
                parent.feature = s.feature;
                parent.threshold = s.threshold;
                parent.left = l;
                parent.right = l + 1;
                for (std::size_t i = 0; i < node_of_.size(); ++i)
                    if (node_of_[i] == node)
                        node_of_[i] = x_(static_cast<Index>(i), s.feature) <= s.threshold ? l : l + 1;
                next.push_back(l);
                next.push_back(l + 1);
            }
            frontier = std::move(next);
        }
        return tree;
    }

private:
    SplitChoice best_split(int node, double wp_total, double wa_total) const
    {
        const auto& w = *w_;
        SplitChoice best;
        best.impurity = std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < sorted_.size(); ++f)
        {
            double wp = 0.0, wa = 0.0;
            bool have_prev = false;
            double prev = 0.0;
            for (Index i : sorted_[f])
            {
                if (node_of_[static_cast<std::size_t>(i)] != node)
                    continue;
                const double v = x_(i, static_cast<Index>(f));
                if (have_prev && v > prev)
                {
                    const double imp = gini(wp, wa) + gini(wp_total - wp, wa_total - wa);
                    if (imp < best.impurity)
                    {
                        best.impurity = imp;
                        best.feature = static_cast<int>(f);
                        best.threshold = prev + (v - prev) / 2.0;
                    }
                }
                wa += w[static_cast<std::size_t>(i)];
                wp += y_[static_cast<std::size_t>(i)] ? w[static_cast<std::size_t>(i)] : 0.0;
                prev = v;
                have_prev = true;
            }
        }
        return best;
    }

    const Eigen::Ref<const Matrix>& x_;
    const std::vector<bool>& y_;
    std::vector<std::vector<Index>> sorted_;
    std::vector<int> node_of_;
    const std::vector<double>* w_ = nullptr;
};

} // namespace

Vector AdaBoostModel::margin(const Eigen::Ref<const Matrix>& x) const
{
    Vector m = Vector::Zero(x.rows());
    for (std::size_t t = 0; t < trees.size(); ++t)
        for (Index i = 0; i < x.rows(); ++i)
            m(i) += 0.5 * alphas[t] * trees[t].vote(x.row(i));
    return m;
}

Vector AdaBoostModel::predict_proba(const Eigen::Ref<const Matrix>& x) const
{
    // Kept strictly inside (0,1); large margins would otherwise round to exactly 0 or 1.
    return margin(x).unaryExpr([](double m) { return std::clamp(1.0 / (1.0 + std::exp(-2.0 * m)), 1e-15, 1.0 - 1e-15); });
}

AdaBoostModel fit_adaboost(const Eigen::Ref<const Matrix>& x, const std::vector<bool>& y, const AdaBoostConfig& config,
                           std::vector<std::string> feature_names)
{
    const Index n = x.rows();
    if (static_cast<Index>(y.size()) != n)
        fail(ErrorKind::ShapeError, "one label per row is required");
    if (!x.allFinite())
        fail(ErrorKind::NumericError, "AdaBoost input has non-finite values");
    AdaBoostModel model;
    model.config = config;
    model.features = std::move(feature_names);
    if (n == 0)
        return model;

    TreeBuilder builder(x, y);
    std::vector<double> w(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
    for (int round = 0; round < config.rounds; ++round)
    {
        VoteTree tree = builder.build(w, config.depth);
        std::vector<bool> wrong(static_cast<std::size_t>(n));
        double err = 0.0;
        for (Index i = 0; i < n; ++i)
        {
            const bool h = tree.vote(x.row(i)) > 0.0;
            wrong[static_cast<std::size_t>(i)] = h != y[static_cast<std::size_t>(i)];
            if (wrong[static_cast<std::size_t>(i)])
                err += w[static_cast<std::size_t>(i)];
        }
        if (err >= 0.5)
            break;
        const double e = std::max(err, 1e-10);
        const double alpha = config.learning_rate * std::log((1.0 - e) / e);
        model.trees.push_back(std::move(tree));
        model.alphas.push_back(alpha);
        model.training_error.push_back(err);
        if (err <= 0.0)
            break;
        double total = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i)
        {
            if (wrong[i])
                w[i] *= std::exp(alpha);
            total += w[i];
        }
        for (auto& v : w)
            v /= total;
    }
    return model;
}

RiskModel fit_risk_model(const FeatureTable& table, const std::vector<std::string>& columns,
                         const std::vector<Index>& rows, const std::vector<bool>& labels,
                         const std::string& subreddit, const std::string& outcome, const AdaBoostConfig& config)
{
    for (const auto& c : columns)
        if (table.info(c).role != Role::Covariate)
            fail(ErrorKind::ProvenanceError,
                 "risk model may only use baseline covariates; '" + c + "' has role " + std::string(to_string(table.info(c).role)));
    if (rows.size() != labels.size())
        fail(ErrorKind::ShapeError, "one label per risk-model row is required");
    const auto pos = std::count(labels.begin(), labels.end(), true);
    if (rows.size() < 20 || pos == 0 || pos == static_cast<long>(labels.size()))
        fail(ErrorKind::SubredditSkipped, "subreddit '" + subreddit + "' lacks 20 candidates with both classes");
    const Matrix x = table.gather(columns)(rows, Eigen::all);
    RiskModel m;
    m.subreddit = subreddit;
    m.outcome = outcome;
    m.ensemble = fit_adaboost(x, labels, config, columns);
    return m;
}

} // namespace approval
