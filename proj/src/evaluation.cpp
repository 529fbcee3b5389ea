#include "approval/evaluation.hpp"

#include "approval/logit.hpp"
#include "approval/pca.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace approval
{

double auc(std::span<const double> scores, const std::vector<bool>& labels)
{
    const std::size_t n = scores.size();
    if (labels.size() != n)
        fail(ErrorKind::ShapeError, "one label per score is required");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n;)
    {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]])
            ++j;
        const double midrank = (static_cast<double>(i) + static_cast<double>(j) + 1.0) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]])
            {
                rank_sum += midrank;
                ++pos;
            }
        i = j;
    }
    const std::size_t neg = n - pos;
    if (pos == 0 || neg == 0)
        fail(ErrorKind::UndefinedAuc, "AUC needs at least one positive and one negative");
    const double np = static_cast<double>(pos);
    return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(neg));
}

double auc(const Vector& scores, const std::vector<bool>& labels)
{
    return auc(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), labels);
}

EvalSplit stratified_split(const std::vector<std::string>& keys, double test_fraction, std::uint64_t seed)
{
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        fail(ErrorKind::ConfigError, "test fraction must lie in (0,1)");
    EvalSplit split;
    split.test_fraction = test_fraction;
    split.seed = seed;
    std::map<std::string, std::vector<Index>> groups;
    for (std::size_t i = 0; i < keys.size(); ++i)
        groups[keys[i]].push_back(static_cast<Index>(i));
    for (auto& [key, rows] : groups)
    {
        Rng rng = make_rng(hash_combine(seed, fnv1a(key)), 0x5b1);
        for (std::size_t k = rows.size(); k > 1; --k)
        {
            const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(k));
            std::swap(rows[k - 1], rows[j]);
        }
        auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rows.size())));
        if (rows.size() >= 2)
            n_test = std::clamp<std::size_t>(n_test, 1, rows.size() - 1);
        split.test.insert(split.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
        split.train.insert(split.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

namespace
{

std::vector<bool> pick(const std::vector<bool>& v, const std::vector<Index>& rows)
{
    std::vector<bool> out;
    out.reserve(rows.size());
    for (Index r : rows)
        out.push_back(v[static_cast<std::size_t>(r)]);
    return out;
}

bool both_classes(const std::vector<bool>& v)
{
    const auto p = std::count(v.begin(), v.end(), true);
    return p > 0 && p < static_cast<long>(v.size());
}

} // namespace

AucComparison run_global_local(const Eigen::Ref<const Matrix>& x, const std::vector<bool>& labels,
                               const std::vector<std::string>& subreddit, const std::vector<std::string>& features,
                               const PredictConfig& config)
{
    const std::size_t n = labels.size();
    if (static_cast<std::size_t>(x.rows()) != n || subreddit.size() != n)
        fail(ErrorKind::ShapeError, "prediction inputs must align");
    std::vector<std::string> keys(n);
    for (std::size_t i = 0; i < n; ++i)
        keys[i] = subreddit[i] + (labels[i] ? "|1" : "|0");

    AucComparison cmp;
    cmp.split = stratified_split(keys, config.test_fraction, config.seed);
    const auto& train = cmp.split.train;
    const auto& test = cmp.split.test;
    const Matrix x_train = x(train, Eigen::all);
    const Matrix x_test = x(test, Eigen::all);
    const auto y_train = pick(labels, train);
    const auto y_test = pick(labels, test);

    GbtConfig gcfg = config.gbt;
    gcfg.seed = config.seed;
    cmp.global_model = train_gbt(x_train, y_train, gcfg, features, "global");
    const Vector global_scores = cmp.global_model.margin(x_test);
    cmp.global_auc = auc(global_scores, y_test);
    try
    {
        cmp.logistic_auc = logistic_auc(x, labels, cmp.split);
    }
    catch (const Error&)
    {
        cmp.logistic_auc.reset();
    }

    std::map<std::string, std::pair<std::vector<Index>, std::vector<Index>>> by_sub; // positions in train / test
    for (std::size_t k = 0; k < train.size(); ++k)
        by_sub[subreddit[static_cast<std::size_t>(train[k])]].first.push_back(static_cast<Index>(k));
    for (std::size_t k = 0; k < test.size(); ++k)
        by_sub[subreddit[static_cast<std::size_t>(test[k])]].second.push_back(static_cast<Index>(k));

    std::vector<std::pair<double, std::string>> deltas;
    for (const auto& [sub, parts] : by_sub)
    {
        CommunityAuc c;
        c.subreddit = sub;
        c.rows = parts.first.size() + parts.second.size();
        c.test_rows = parts.second.size();
        std::vector<bool> yt, yl;
        for (Index k : parts.second)
            yt.push_back(y_test[static_cast<std::size_t>(k)]);
        for (Index k : parts.first)
            yl.push_back(y_train[static_cast<std::size_t>(k)]);
        if (both_classes(yt))
            c.global_auc = auc(Vector(global_scores(parts.second)), yt);
        if (c.rows < config.local_min_rows)
            c.status = "fewer than " + std::to_string(config.local_min_rows) + " rows";
        else if (!both_classes(yl))
            c.status = "single class in training rows";
        else if (!c.global_auc)
            c.status = "single class in test rows";
        else
        {
            GbtConfig lcfg = gcfg;
            lcfg.seed = hash_combine(config.seed, fnv1a(sub));
            const BoostedModel local = train_gbt(x_train(parts.first, Eigen::all), yl, lcfg, features, sub);
            c.local_auc = auc(local.margin(x_test(parts.second, Eigen::all)), yt);
            c.delta = *c.local_auc - *c.global_auc;
            c.status = "ok";
            deltas.emplace_back(*c.delta, sub);
        }
        cmp.communities.push_back(std::move(c));
    }

    double sg = 0.0, sl = 0.0;
    int count = 0;
    for (const auto& c : cmp.communities)
        if (c.local_auc)
        {
            sg += *c.global_auc;
            sl += *c.local_auc;
            ++count;
        }
    if (count > 0)
    {
        cmp.mean_global = sg / count;
        cmp.mean_local = sl / count;
    }
    auto by_delta = deltas;
    std::sort(by_delta.begin(), by_delta.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (const auto& [d, s] : by_delta)
        if (d > 0 && static_cast<int>(cmp.top_gains.size()) < config.top_k)
            cmp.top_gains.push_back(s);
    for (auto it = by_delta.rbegin(); it != by_delta.rend(); ++it)
        if (it->first < 0 && static_cast<int>(cmp.top_losses.size()) < config.top_k)
            cmp.top_losses.push_back(it->second);
    return cmp;
}

namespace
{

SparseDesign simple_design(const Eigen::Ref<const Matrix>& x, const std::vector<bool>& y)
{
    SparseDesign d;
    d.dense.resize(x.rows(), x.cols() + 1);
    d.dense.col(0).setOnes();
    d.dense.rightCols(x.cols()) = x;
    d.dense_names.push_back("(intercept)");
    d.dense_family.push_back(TermFamily::Intercept);
    for (Index j = 0; j < x.cols(); ++j)
    {
        d.dense_names.push_back("x" + std::to_string(j));
        d.dense_family.push_back(TermFamily::Main);
    }
    d.y.resize(x.rows());
    for (Index i = 0; i < x.rows(); ++i)
        d.y(i) = y[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    d.offset = Vector::Zero(x.rows());
    d.cluster.assign(static_cast<std::size_t>(x.rows()), 0);
    d.cluster_names = {"all"};
    prune_collinear(d);
    return d;
}

} // namespace

double logistic_auc(const Eigen::Ref<const Matrix>& x, const std::vector<bool>& labels, const EvalSplit& split)
{
    const auto y_train = pick(labels, split.train);
    if (!both_classes(y_train))
        fail(ErrorKind::DegenerateLabels, "logistic baseline needs both classes");
    const Matrix xt = x(split.train, Eigen::all);
    const SparseDesign d = simple_design(xt, y_train);
    LogitOptions opt;
    opt.ridge = 1e-4;
    opt.throw_on_max_iter = false;
    const FitResult fit = fit_logit(d, opt);
    // map the surviving columns back onto the test rows
    Vector b = Vector::Zero(x.cols());
    double b0 = 0.0;
    for (std::size_t k = 0; k < d.dense_names.size(); ++k)
    {
        const auto& name = d.dense_names[k];
        if (name == "(intercept)")
            b0 = fit.beta(static_cast<Index>(k));
        else
            b(std::stoi(name.substr(1))) = fit.beta(static_cast<Index>(k));
    }
    const Vector scores = (x(split.test, Eigen::all) * b).array() + b0;
    return auc(scores, pick(labels, split.test));
}

BaselineResult prosociality_baseline(const Vector& support, const Vector& agreement, const Vector& politeness,
                                     const std::vector<bool>& labels, const EvalSplit& split)
{
    const Index n = static_cast<Index>(labels.size());
    if (support.size() != n || agreement.size() != n || politeness.size() != n)
        fail(ErrorKind::BaselineSkipped, "prosociality columns missing or misaligned");
    Matrix m(n, 3);
    m << support, agreement, politeness;
    for (Index j = 0; j < 3; ++j)
    {
        double sum = 0.0;
        int cnt = 0;
        for (Index r : split.train)
            if (!std::isnan(m(r, j)))
            {
                sum += m(r, j);
                ++cnt;
            }
        if (cnt == 0)
            fail(ErrorKind::BaselineSkipped, "prosociality column has no values in the training rows");
        const double mean = sum / cnt;
        double ss = 0.0;
        for (Index r : split.train)
            if (!std::isnan(m(r, j)))
                ss += (m(r, j) - mean) * (m(r, j) - mean);
        const double sd = std::sqrt(ss / cnt);
        for (Index i = 0; i < n; ++i)
        {
            const double v = std::isnan(m(i, j)) ? mean : m(i, j);
            m(i, j) = sd > 0 ? (v - mean) / sd : 0.0;
        }
    }
    const Matrix m_train = m(split.train, Eigen::all);
    const auto pca = fit_pca(m_train, 1);
    BaselineResult res;
    res.loadings = pca.components.col(0);
    res.explained_ratio = pca.explained_variance_ratio(0);
    res.composite = pc_scores(m, pca).col(0);

    const auto y_train = pick(labels, split.train);
    if (!both_classes(y_train))
        fail(ErrorKind::DegenerateLabels, "prosociality baseline needs both classes");
    const SparseDesign d = simple_design(res.composite(split.train), y_train);
    LogitOptions opt;
    opt.throw_on_max_iter = false;
    const FitResult fit = fit_logit(d, opt);
    res.intercept = fit.beta(0);
    res.slope = d.dense.cols() > 1 ? fit.beta(1) : 0.0;
    const Vector scores = (res.composite(split.test) * res.slope).array() + res.intercept;
    res.auc = auc(scores, pick(labels, split.test));
    return res;
}

} // namespace approval
