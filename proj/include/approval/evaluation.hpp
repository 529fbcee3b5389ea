#ifndef APPROVAL_EVALUATION_HPP
#define APPROVAL_EVALUATION_HPP

#include "approval/gbt.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace approval
{

/// Mann-Whitney AUC with midranks (ties count 1/2). Single-class labels raise UndefinedAuc.
double auc(std::span<const double> scores, const std::vector<bool>& labels);
double auc(const Vector& scores, const std::vector<bool>& labels);

struct EvalSplit
{
    std::vector<Index> train;
    std::vector<Index> test;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
};

/// Per stratification key, rows are shuffled with a key-derived substream and
/// round(fraction * n) go to test; keys with >= 2 rows keep >= 1 row per side.
EvalSplit stratified_split(const std::vector<std::string>& keys, double test_fraction, std::uint64_t seed);

struct PredictConfig
{
    GbtConfig gbt;
    double test_fraction = 0.2;
    std::size_t local_min_rows = 200;
    int top_k = 10;
    std::uint64_t seed = 0;
};

struct CommunityAuc
{
    std::string subreddit;
    std::size_t rows = 0;
    std::size_t test_rows = 0;
    std::optional<double> global_auc; // global model on this community's test rows
    std::optional<double> local_auc;
    std::optional<double> delta; // local - global
    std::string status;          // "ok" or why the local model is missing
};

struct AucComparison
{
    double global_auc = 0.0;
    std::optional<double> logistic_auc;
    std::vector<CommunityAuc> communities;
    std::vector<std::string> top_gains;  // largest positive deltas, descending
    std::vector<std::string> top_losses; // most negative deltas, ascending
    double mean_global = 0.0;            // over communities with a local model
    double mean_local = 0.0;
    BoostedModel global_model;
    EvalSplit split;
};

/// One split stratified by (subreddit, label) shared by every model, so
/// deltas are computed on identical test rows.
AucComparison run_global_local(const Eigen::Ref<const Matrix>& x, const std::vector<bool>& labels,
                               const std::vector<std::string>& subreddit, const std::vector<std::string>& features,
                               const PredictConfig& config);

struct BaselineResult
{
    double auc = 0.5;
    Vector loadings;          // first principal direction of the standardized columns
    double explained_ratio = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    Vector composite;         // for every row
};

/// First principal component of the three standardized columns as the only
/// regressor of a logistic fit on `train`; AUC on `test`. NaN cells are
/// imputed with the training mean. Columns of the wrong length or all-NaN
/// raise BaselineSkipped.
BaselineResult prosociality_baseline(const Vector& support, const Vector& agreement, const Vector& politeness,
                                     const std::vector<bool>& labels, const EvalSplit& split);

/// Plain logistic regression on all columns (no fixed effects); AUC on the test rows.
double logistic_auc(const Eigen::Ref<const Matrix>& x, const std::vector<bool>& labels, const EvalSplit& split);

} // namespace approval

#endif // APPROVAL_EVALUATION_HPP
