#ifndef APPROVAL_LDA_HPP
#define APPROVAL_LDA_HPP

#include "approval/common.hpp"

#include <string>
#include <vector>

namespace approval
{

struct LdaConfig
{
    int topics = 10;
    double alpha = -1.0; // <= 0 means 50 / topics
    double beta = 0.01;
    int sweeps = 1000;
    int average_last = 100;
    std::uint64_t seed = 0;
};

struct LdaResult
{
    std::vector<std::string> vocabulary;
    Matrix proportions; // documents x topics, rows on the simplex
    Matrix topic_word;  // topics x vocabulary, rows on the simplex
    std::vector<bool> empty_document; // given uniform proportions
    double alpha = 0.0;
};

/// Collapsed Gibbs sampler. Document proportions are the posterior means
/// (n_dk + alpha) / (n_d + K alpha) averaged over the final `average_last` sweeps.
LdaResult fit_lda(const std::vector<std::vector<std::string>>& documents, const LdaConfig& config);

/// Drops a short English stopword list and pure digits; topic models read these tokens.
std::vector<std::string> topic_tokens(const std::vector<std::string>& tokens);

} // namespace approval

#endif // APPROVAL_LDA_HPP
