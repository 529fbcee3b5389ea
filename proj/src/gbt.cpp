#include "approval/gbt.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace approval
{

namespace
{

struct Binned
{
    std::vector<std::vector<double>> cuts; // per feature: bin b holds x <= cuts[b] (last bin open)
    std::vector<std::uint8_t> codes;        // row-major n x f
    Index n = 0;
    Index f = 0;
};

Binned bin_features(const Eigen::Ref<const Matrix>& x, int max_bins)
{
    Binned b;
    b.n = x.rows();
    b.f = x.cols();
    b.cuts.resize(static_cast<std::size_t>(b.f));
    b.codes.resize(static_cast<std::size_t>(b.n * b.f));
    std::vector<double> v(static_cast<std::size_t>(b.n));
    for (Index j = 0; j < b.f; ++j)
    {
        for (Index i = 0; i < b.n; ++i)
            v[static_cast<std::size_t>(i)] = x(i, j);
        std::sort(v.begin(), v.end());
        std::vector<double> uniq;
        for (double a : v)
            if (uniq.empty() || a > uniq.back())
                uniq.push_back(a);
        auto& cuts = b.cuts[static_cast<std::size_t>(j)];
        if (static_cast<int>(uniq.size()) <= max_bins)
        {
            for (std::size_t k = 0; k + 1 < uniq.size(); ++k)
                cuts.push_back(uniq[k] + (uniq[k + 1] - uniq[k]) / 2.0);
        }
        else
        {
            for (int q = 1; q < max_bins; ++q)
            {
                const std::size_t pos = static_cast<std::size_t>(static_cast<double>(q) * v.size() / max_bins);
                const double c = v[std::min(pos, v.size() - 1)];
                if (cuts.empty() || c > cuts.back())
                    cuts.push_back(c);
            }
            if (!cuts.empty() && cuts.back() >= uniq.back())
                cuts.pop_back();
        }
        for (Index i = 0; i < b.n; ++i)
        {
            const auto it = std::lower_bound(cuts.begin(), cuts.end(), x(i, j));
            b.codes[static_cast<std::size_t>(i * b.f + j)] = static_cast<std::uint8_t>(it - cuts.begin());
        }
    }
    return b;
}

double sigmoid(double m)
{
    return m >= 0 ? 1.0 / (1.0 + std::exp(-m)) : std::exp(m) / (1.0 + std::exp(m));
}

double mean_log_loss(const Vector& margin, const std::vector<bool>& y)
{
    double s = 0.0;
    for (Index i = 0; i < margin.size(); ++i)
    {
        const double m = margin(i);
        const double softplus = m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
        s += softplus - (y[static_cast<std::size_t>(i)] ? m : 0.0);
    }
    return s / static_cast<double>(margin.size());
}

} // namespace

Vector BoostedModel::margin(const Eigen::Ref<const Matrix>& x) const
{
    if (x.cols() != static_cast<Index>(features.size()))
        fail(ErrorKind::ShapeError, "prediction matrix does not match the model's feature manifest");
    Vector m = Vector::Constant(x.rows(), base_score);
    for (const auto& t : trees)
        for (Index i = 0; i < x.rows(); ++i)
            m(i) += t.value(x.row(i));
    return m;
}

Vector BoostedModel::predict_proba(const Eigen::Ref<const Matrix>& x) const
{
    return margin(x).unaryExpr([](double m) { return sigmoid(m); });
}

std::string BoostedModel::to_json() const
{
    nlohmann::json j;
    j["format_version"] = format_version;
    j["scope"] = scope;
    j["features"] = features;
    j["config"] = {{"depth", config.depth},
                   {"rounds", config.rounds},
                   {"learning_rate", config.learning_rate},
                   {"lambda", config.lambda},
                   {"min_child_weight", config.min_child_weight},
                   {"max_bins", config.max_bins},
                   {"seed", config.seed}};
    j["base_score"] = base_score;
    j["training_rows"] = training_rows;
    j["training_loss"] = training_loss;
    j["trees"] = nlohmann::json::array();
    for (const auto& t : trees)
    {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : t.nodes)
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
        j["trees"].push_back(nodes);
    }
    return j.dump();
}

BoostedModel BoostedModel::from_json(const std::string& text)
{
    BoostedModel m;
    try
    {
        const auto j = nlohmann::json::parse(text);
        if (j.at("format_version").get<int>() != format_version)
            fail(ErrorKind::SchemaError, "unsupported model format version");
        m.scope = j.at("scope").get<std::string>();
        m.features = j.at("features").get<std::vector<std::string>>();
        const auto& c = j.at("config");
        m.config.depth = c.at("depth").get<int>();
        m.config.rounds = c.at("rounds").get<int>();
        m.config.learning_rate = c.at("learning_rate").get<double>();
        m.config.lambda = c.at("lambda").get<double>();
        m.config.min_child_weight = c.at("min_child_weight").get<double>();
        m.config.max_bins = c.at("max_bins").get<int>();
        m.config.seed = c.at("seed").get<std::uint64_t>();
        m.base_score = j.at("base_score").get<double>();
        m.training_rows = j.at("training_rows").get<std::size_t>();
        m.training_loss = j.at("training_loss").get<std::vector<double>>();
        for (const auto& tj : j.at("trees"))
        {
            RegressionTree t;
            for (const auto& nj : tj)
                t.nodes.push_back({nj.at(0).get<int>(), nj.at(1).get<double>(), nj.at(2).get<int>(),
                                   nj.at(3).get<int>(), nj.at(4).get<double>()});
            m.trees.push_back(std::move(t));
        }
    }
    catch (const nlohmann::json::exception& e)
    {
        fail(ErrorKind::SchemaError, std::string("malformed model file: ") + e.what());
    }
    return m;
}

BoostedModel train_gbt(const Eigen::Ref<const Matrix>& x, const std::vector<bool>& y, const GbtConfig& config,
                       std::vector<std::string> features, std::string scope)
{
    const Index n = x.rows();
    if (static_cast<Index>(y.size()) != n)
        fail(ErrorKind::ShapeError, "one label per row is required");
    const auto pos = std::count(y.begin(), y.end(), true);
    if (pos == 0 || pos == static_cast<long>(y.size()))
        fail(ErrorKind::DegenerateLabels, "boosting needs both classes in the training rows");
    if (!x.allFinite())
        fail(ErrorKind::NumericError, "boosting input has non-finite values");
    if (config.max_bins < 2 || config.max_bins > 256)
        fail(ErrorKind::ConfigError, "max_bins must lie in [2, 256]");

    BoostedModel model;
    model.scope = std::move(scope);
    model.features = std::move(features);
    if (model.features.empty())
        for (Index j = 0; j < x.cols(); ++j)
            model.features.push_back("x" + std::to_string(j));
    if (static_cast<Index>(model.features.size()) != x.cols())
        fail(ErrorKind::ShapeError, "one feature name per column is required");
    model.config = config;
    model.training_rows = static_cast<std::size_t>(n);
    const double prior = static_cast<double>(pos) / static_cast<double>(n);
    model.base_score = std::log(prior / (1.0 - prior));

    const Binned bins = bin_features(x, config.max_bins);
    const Index f = bins.f;
    constexpr int B = 256;
    Vector margin = Vector::Constant(n, model.base_score);
    std::vector<double> g(static_cast<std::size_t>(n)), h(static_cast<std::size_t>(n));
    std::vector<int> node_of(static_cast<std::size_t>(n));

    for (int round = 0; round < config.rounds; ++round)
    {
        for (Index i = 0; i < n; ++i)
        {
            const double p = sigmoid(margin(i));
            g[static_cast<std::size_t>(i)] = p - (y[static_cast<std::size_t>(i)] ? 1.0 : 0.0);
            h[static_cast<std::size_t>(i)] = std::max(p * (1.0 - p), 1e-16);
        }
        RegressionTree tree;
        tree.nodes.push_back({});
        std::fill(node_of.begin(), node_of.end(), 0);
        std::vector<int> frontier{0};
        std::vector<double> node_g(1, 0.0), node_h(1, 0.0);
        for (Index i = 0; i < n; ++i)
        {
            node_g[0] += g[static_cast<std::size_t>(i)];
            node_h[0] += h[static_cast<std::size_t>(i)];
        }
        for (int level = 0; level < config.depth && !frontier.empty(); ++level)
        {
            const std::size_t slots = frontier.size();
            std::vector<int> slot_of_node(tree.nodes.size(), -1);
            for (std::size_t s = 0; s < slots; ++s)
                slot_of_node[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);
            std::vector<double> hist(slots * static_cast<std::size_t>(f) * B * 2, 0.0);
            for (Index i = 0; i < n; ++i)
            {
                const int node = node_of[static_cast<std::size_t>(i)];
                if (node < 0 || static_cast<std::size_t>(node) >= slot_of_node.size())
                    continue;
                const int s = slot_of_node[static_cast<std::size_t>(node)];
                if (s < 0)
                    continue;
                double* base = &hist[static_cast<std::size_t>(s) * f * B * 2];
                const std::uint8_t* codes = &bins.codes[static_cast<std::size_t>(i * f)];
                const double gi = g[static_cast<std::size_t>(i)], hi = h[static_cast<std::size_t>(i)];
                for (Index j = 0; j < f; ++j)
                {
                    double* cell = base + (j * B + codes[j]) * 2;
                    cell[0] += gi;
                    cell[1] += hi;
                }
            }
            std::vector<int> next;
            for (std::size_t s = 0; s < slots; ++s)
            {
                const int node = frontier[s];
                const double G = node_g[static_cast<std::size_t>(node)];
                const double H = node_h[static_cast<std::size_t>(node)];
                const double parent_score = G * G / (H + config.lambda);
                double best_gain = 0.0;
                int best_f = -1, best_bin = -1;
                double best_gl = 0.0, best_hl = 0.0;
                for (Index j = 0; j < f; ++j)
                {
                    const double* cell = &hist[(s * static_cast<std::size_t>(f) + static_cast<std::size_t>(j)) * B * 2];
                    const int nb = static_cast<int>(bins.cuts[static_cast<std::size_t>(j)].size());
                    double gl = 0.0, hl = 0.0;
                    for (int b = 0; b < nb; ++b)
                    {
                        gl += cell[b * 2];
                        hl += cell[b * 2 + 1];
                        const double gr = G - gl, hr = H - hl;
                        if (hl < config.min_child_weight || hr < config.min_child_weight)
                            continue;
                        const double gain =
                            0.5 * (gl * gl / (hl + config.lambda) + gr * gr / (hr + config.lambda) - parent_score);
                        if (gain > best_gain + 1e-12)
                        {
                            best_gain = gain;
                            best_f = static_cast<int>(j);
                            best_bin = b;
                            best_gl = gl;
                            best_hl = hl;
                        }
                    }
                }
                if (best_f < 0)
                    continue;
                const int l = static_cast<int>(tree.nodes.size());
                tree.nodes.push_back({});
                tree.nodes.push_back({});
                node_g.push_back(best_gl);
                node_h.push_back(best_hl);
                node_g.push_back(G - best_gl);
                node_h.push_back(H - best_hl);
                auto& parent = tree.nodes[static_cast<std::size_t>(node)];
                parent.feature = best_f;
                parent.threshold = bins.cuts[static_cast<std::size_t>(best_f)][static_cast<std::size_t>(best_bin)];
                parent.left = l;
                parent.right = l + 1;
                next.push_back(l);
                next.push_back(l + 1);
            }
            for (Index i = 0; i < n; ++i)
            {
                const int node = node_of[static_cast<std::size_t>(i)];
                const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
                if (nd.feature < 0)
                    continue;
                const int code = bins.codes[static_cast<std::size_t>(i * f + nd.feature)];
                // bin b holds values <= cuts[b]; the split sends bins <= best_bin left
                const auto& cuts = bins.cuts[static_cast<std::size_t>(nd.feature)];
                const bool left = code < static_cast<int>(cuts.size()) && cuts[static_cast<std::size_t>(code)] <= nd.threshold;
                node_of[static_cast<std::size_t>(i)] = left ? nd.left : nd.right;
            }
            frontier = std::move(next);
        }
        for (std::size_t k = 0; k < tree.nodes.size(); ++k)
            if (tree.nodes[k].feature < 0)
                tree.nodes[k].value = -config.learning_rate * node_g[k] / (node_h[k] + config.lambda);
        for (Index i = 0; i < n; ++i)
            margin(i) += tree.nodes[static_cast<std::size_t>(node_of[static_cast<std::size_t>(i)])].value;
        model.trees.push_back(std::move(tree));
        model.training_loss.push_back(mean_log_loss(margin, y));
    }
    return model;
}

} // namespace approval
