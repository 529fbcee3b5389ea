#include "approval/lda.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

namespace approval
{

std::vector<std::string> topic_tokens(const std::vector<std::string>& tokens)
{
    static const std::unordered_set<std::string> stop{
        "a",    "an",   "the",  "and",   "or",    "but",  "if",    "of",   "to",    "in",   "on",    "at",
        "for",  "with", "by",   "from",  "as",    "is",   "are",   "was",  "were",  "be",   "been",  "it",
        "its",  "it's", "this", "that",  "these", "those", "i",    "i'm",  "me",    "my",   "we",    "our",
        "you",  "your", "he",   "she",   "they",  "them", "their", "his",  "her",   "so",   "not",   "no",
        "do",   "does", "did",  "have",  "has",   "had",  "just",  "can",  "will",  "would", "there", "what",
        "when", "how",  "all",  "about", "up",    "out",  "than",  "then", "also",  "very", "don't", "into"};
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens)
    {
        if (t.size() < 2 || stop.count(t))
            continue;
        if (std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; }))
            continue;
        out.push_back(t);
    }
    return out;
}

LdaResult fit_lda(const std::vector<std::vector<std::string>>& documents, const LdaConfig& config)
{
    const int K = config.topics;
    if (K < 2)
        fail(ErrorKind::ConfigError, "LDA needs at least two topics");
    if (documents.size() < static_cast<std::size_t>(K))
        fail(ErrorKind::InsufficientRows, "LDA needs at least as many documents as topics");
    if (config.sweeps < 1 || config.average_last < 1 || config.average_last > config.sweeps)
        fail(ErrorKind::ConfigError, "LDA sweep budget is inconsistent");

    LdaResult result;
    {
        std::map<std::string, int> vocab;
        for (const auto& doc : documents)
            for (const auto& w : doc)
                vocab.emplace(w, 0);
        if (vocab.empty())
            fail(ErrorKind::InsufficientRows, "LDA vocabulary is empty");
        int id = 0;
        for (auto& [w, v] : vocab)
        {
            v = id++;
            result.vocabulary.push_back(w);
        }
        std::vector<std::vector<int>> ids(documents.size());
        for (std::size_t d = 0; d < documents.size(); ++d)
            for (const auto& w : documents[d])
                ids[d].push_back(vocab[w]);

        const double alpha = config.alpha > 0 ? config.alpha : 50.0 / K;
        const double beta = config.beta;
        const int V = static_cast<int>(result.vocabulary.size());
        const double vbeta = V * beta;
        result.alpha = alpha;

        const std::size_t D = documents.size();
        std::vector<std::vector<int>> z(D);
        std::vector<int> ndk(D * K, 0), nwk(static_cast<std::size_t>(V) * K, 0), nk(K, 0);
        Rng rng = make_rng(config.seed, 0x1da);
        for (std::size_t d = 0; d < D; ++d)
        {
            z[d].resize(ids[d].size());
            for (std::size_t i = 0; i < ids[d].size(); ++i)
            {
                const int k = static_cast<int>(uniform01(rng) * K);
                z[d][i] = k;
                ++ndk[d * K + k];
                ++nwk[static_cast<std::size_t>(ids[d][i]) * K + k];
                ++nk[k];
            }
        }

        Matrix theta = Matrix::Zero(static_cast<Index>(D), K);
        std::vector<double> cum(K);
        for (int sweep = 0; sweep < config.sweeps; ++sweep)
        {
            for (std::size_t d = 0; d < D; ++d)
            {
                int* nd = &ndk[d * K];
                for (std::size_t i = 0; i < ids[d].size(); ++i)
                {
                    const int w = ids[d][i];
                    int* nw = &nwk[static_cast<std::size_t>(w) * K];
                    int k = z[d][i];
                    --nd[k];
                    --nw[k];
                    --nk[k];
                    double total = 0.0;
                    for (int t = 0; t < K; ++t)
                    {
                        total += (nd[t] + alpha) * (nw[t] + beta) / (nk[t] + vbeta);
                        cum[t] = total;
                    }
                    const double u = uniform01(rng) * total;
                    k = 0;
                    while (k < K - 1 && cum[k] <= u)
                        ++k;
                    z[d][i] = k;
                    ++nd[k];
                    ++nw[k];
                    ++nk[k];
                }
            }
            if (sweep >= config.sweeps - config.average_last)
                for (std::size_t d = 0; d < D; ++d)
                {
                    const double denom = static_cast<double>(ids[d].size()) + K * alpha;
                    for (int t = 0; t < K; ++t)
                        theta(static_cast<Index>(d), t) += (ndk[d * K + t] + alpha) / denom;
                }
        }
        theta /= static_cast<double>(config.average_last);
        result.empty_document.assign(D, false);
        for (std::size_t d = 0; d < D; ++d)
        {
            if (ids[d].empty())
            {
                result.empty_document[d] = true;
                theta.row(static_cast<Index>(d)).setConstant(1.0 / K);
            }
            theta.row(static_cast<Index>(d)) /= theta.row(static_cast<Index>(d)).sum();
        }
        result.proportions = std::move(theta);
        result.topic_word.resize(K, V);
        for (int t = 0; t < K; ++t)
            for (int w = 0; w < V; ++w)
                result.topic_word(t, w) = (nwk[static_cast<std::size_t>(w) * K + t] + beta) / (nk[t] + vbeta);
    }
    return result;
}

} // namespace approval
