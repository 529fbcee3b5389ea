#ifndef APPROVAL_CORPUS_HPP
#define APPROVAL_CORPUS_HPP

#include "approval/common.hpp"
#include "approval/csv.hpp"
#include "approval/schema.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace approval::corpus
{

struct PostRecord
{
    std::string post_id;
    std::string subreddit;
    std::string author_id;
    std::int64_t created_utc = 0;
    std::string text;
    std::int64_t score = 0;
    std::int64_t n_awards = 0;
    std::int64_t n_gold = 0;
    bool removed = false;
    std::optional<std::int64_t> author_created_utc;
};

/// Title and body joined the way every text feature sees them.
std::string analyzed_text(const std::string& title, const std::string& body);

constexpr int embedding_dim = 384;

inline const std::array<std::string, 7>& neural_columns()
{
    static const std::array<std::string, 7> names{"toxicity", "sentiment", "politeness", "prosocial_support",
                                                  "prosocial_agreement", "prosocial_politeness",
                                                  "author_created_utc"};
    return names;
}

/// Loaded canonical table. Null precomputed cells are NaN.
struct Corpus
{
    std::vector<PostRecord> posts;
    std::vector<std::string> titles;
    std::vector<std::string> bodies;
    Matrix embeddings; // n x 384, or empty when the file carries no embeddings
    std::map<std::string, Vector> columns;

    std::size_t size() const { return posts.size(); }
    bool has_embeddings() const { return embeddings.rows() > 0; }
};

/// Validates against `manifest` (throws ValidationError carrying the first issues) and parses.
Corpus load_corpus(const csv::Table& table, const schema::Manifest& manifest);
csv::Table to_table(const Corpus& corpus);

struct ObservationWindow
{
    std::int64_t start = 0;
    std::int64_t end = 0; // exclusive
    int baseline_days = 14;

    std::int64_t baseline_end() const { return start + baseline_days * seconds_per_day; }
    bool in_baseline(std::int64_t t) const { return t >= start && t < baseline_end(); }
    bool in_sampling(std::int64_t t) const { return t >= baseline_end() && t < end; }
    bool contains(std::int64_t t) const { return t >= start && t < end; }
};

/// Author-level part of Z, computed from the baseline window only.
struct AuthorBaseline
{
    int n_posts = 0;
    double daily_post_rate = 0.0;
    double daily_removal_rate = 0.0;
    double mean_score = 0.0;
    double mean_awards = 0.0;
};

/// The six baseline covariates (Z). Rates are raw or log1p-scaled per `log_scaled`.
struct BaselineCovariates
{
    double daily_post_rate = 0.0;
    double daily_removal_rate = 0.0;
    double mean_score = 0.0;
    double mean_awards = 0.0;
    double account_age_days = 0.0;
    double trend_days = 0.0;
    bool log_scaled = false;

    static const std::array<std::string, 6>& names();
    Eigen::Matrix<double, 6, 1> as_vector() const;
};

AuthorBaseline summarize_baseline(std::span<const PostRecord> history, const ObservationWindow& window);

/// Evaluates Z for a post made at `at_utc`. Without an account creation time
/// the author's earliest observed post stands in for it.
BaselineCovariates covariates_at(const AuthorBaseline& baseline, const ObservationWindow& window,
                                 std::int64_t at_utc, std::int64_t account_created_utc, bool log_scale);

/// Convenience wrapper: baseline summary plus per-post evaluation.
/// Throws AuthorIneligible when the history has no baseline-window post.
BaselineCovariates compute_baseline_covariates(std::span<const PostRecord> history, const ObservationWindow& window,
                                               std::int64_t at_utc,
                                               std::optional<std::int64_t> account_created_utc = std::nullopt,
                                               bool log_scale = false);

constexpr double newcomer_age_days = 90.0;

inline bool is_newcomer(double account_age_days, double threshold = newcomer_age_days)
{
    return account_age_days < threshold;
}

enum class Outcome
{
    Score,
    Award,
    Gold,
};

std::string_view to_string(Outcome outcome);
Outcome parse_outcome(std::string_view text);

struct OutcomeLabels
{
    bool high_score = false;
    bool awarded = false;
    bool gilded = false;
    int score_quartile = 1;

    bool satisfies(Outcome outcome) const;
};

/// Nearest-rank percentile of ascending-sorted values: value at rank ceil(p/100 * n).
double nearest_rank_percentile(std::span<const double> sorted, double percent);

struct LabelingResult
{
    std::vector<std::optional<OutcomeLabels>> labels; // nullopt for posts in skipped groups
    std::vector<std::string> skipped_groups;          // "subreddit/YYYYMM"
};

LabelingResult label_outcomes(std::span<const PostRecord> posts);

struct CandidatePool
{
    Outcome outcome = Outcome::Score;
    std::vector<std::string> positives;
    std::vector<std::string> controls;
    std::vector<std::size_t> positive_rows; // indices into the input post list
    std::vector<std::size_t> control_rows;
    std::uint64_t sampling_seed = 0;
    int ratio = 3;
    std::vector<std::string> undersupplied_cells; // "subreddit/day" with fewer eligible controls than needed
    std::vector<std::string> skipped_subreddits;  // no positives
};

/// `eligible[i]` marks posts inside the sampling window whose author has a baseline.
/// Removed posts may serve as controls but never as positives.
CandidatePool build_candidate_pool(std::span<const PostRecord> posts,
                                   std::span<const std::optional<OutcomeLabels>> labels,
                                   std::span<const bool> eligible, Outcome outcome, int ratio, std::uint64_t seed);

/// Baselines for every author with at least one baseline-window post.
std::unordered_map<std::string, AuthorBaseline> baselines_by_author(std::span<const PostRecord> posts,
                                                                    const ObservationWindow& window);

/// Earliest known account time per author (explicit creation time, else first observed post).
std::unordered_map<std::string, std::int64_t> account_origin_by_author(std::span<const PostRecord> posts);

} // namespace approval::corpus

#endif // APPROVAL_CORPUS_HPP
