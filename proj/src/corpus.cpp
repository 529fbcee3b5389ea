#include "approval/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace approval::corpus
{

std::string analyzed_text(const std::string& title, const std::string& body)
{
    if (body.empty())
        return title;
    if (title.empty())
        return body;
    return title + "\n\n" + body;
}

namespace
{

std::int64_t parse_int(const std::string& s, const char* column, std::size_t row)
{
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        fail(ErrorKind::ValidationError,
             std::string("row ") + std::to_string(row + 1) + ": column " + column + " is not an integer");
    return v;
}

double parse_real_or_nan(const std::string& s)
{
    if (s.empty())
        return std::numeric_limits<double>::quiet_NaN();
    return std::strtod(s.c_str(), nullptr);
}

} // namespace

Corpus load_corpus(const csv::Table& table, const schema::Manifest& manifest)
{
    const auto report = schema::validate(table, manifest, 20);
    if (!report.ok())
    {
        std::string msg = std::to_string(report.issues.size()) + " schema issue(s):";
        for (const auto& issue : report.issues)
            msg += "\n  " + (issue.row ? "row " + std::to_string(*issue.row) + " " : std::string()) + issue.column +
                   ": " + issue.message;
        fail(ErrorKind::ValidationError, msg);
    }

    const auto c_id = table.require_column("post_id");
    const auto c_sub = table.require_column("subreddit");
    const auto c_author = table.require_column("author_id");
    const auto c_time = table.require_column("created_utc");
    const auto c_title = table.require_column("title");
    const auto c_body = table.require_column("body");
    const auto c_score = table.require_column("score");
    const auto c_awards = table.require_column("n_awards");
    const auto c_gold = table.require_column("n_gold");
    const auto c_removed = table.require_column("removed");
    const auto c_created = table.column("author_created_utc");

    Corpus corpus;
    const std::size_t n = table.rows.size();
    corpus.posts.reserve(n);
    corpus.titles.reserve(n);
    corpus.bodies.reserve(n);
    for (std::size_t r = 0; r < n; ++r)
    {
        const auto& row = table.rows[r];
        PostRecord p;
        p.post_id = row[c_id];
        p.subreddit = row[c_sub];
        p.author_id = row[c_author];
        p.created_utc = parse_int(row[c_time], "created_utc", r);
        p.text = analyzed_text(row[c_title], row[c_body]);
        p.score = parse_int(row[c_score], "score", r);
        p.n_awards = parse_int(row[c_awards], "n_awards", r);
        p.n_gold = parse_int(row[c_gold], "n_gold", r);
        schema::parse_bool(row[c_removed], p.removed);
        if (c_created && !row[*c_created].empty())
            p.author_created_utc = parse_int(row[*c_created], "author_created_utc", r);
        corpus.posts.push_back(std::move(p));
        corpus.titles.push_back(row[c_title]);
        corpus.bodies.push_back(row[c_body]);
    }

    for (const auto& name : neural_columns())
    {
        if (name == "author_created_utc")
            continue;
        if (auto idx = table.column(name))
        {
            Vector v(static_cast<Index>(n));
            for (std::size_t r = 0; r < n; ++r)
                v(static_cast<Index>(r)) = parse_real_or_nan(table.rows[r][*idx]);
            corpus.columns[name] = std::move(v);
        }
    }

    if (table.column("emb_000"))
    {
        std::vector<std::size_t> idx(embedding_dim);
        for (int k = 0; k < embedding_dim; ++k)
        {
            std::string digits = std::to_string(k);
            while (digits.size() < 3)
                digits.insert(digits.begin(), '0');
            idx[k] = table.require_column("emb_" + digits);
        }
        corpus.embeddings.resize(static_cast<Index>(n), embedding_dim);
        for (std::size_t r = 0; r < n; ++r)
            for (int k = 0; k < embedding_dim; ++k)
                corpus.embeddings(static_cast<Index>(r), k) = parse_real_or_nan(table.rows[r][idx[k]]);
    }
    return corpus;
}

csv::Table to_table(const Corpus& corpus)
{
    csv::Table table;
    table.header = {"post_id", "subreddit", "author_id", "created_utc", "title", "body",
                    "score",   "n_awards",  "n_gold",    "removed"};
    const bool with_created =
        std::any_of(corpus.posts.begin(), corpus.posts.end(), [](const auto& p) { return p.author_created_utc; });
    if (with_created)
        table.header.push_back("author_created_utc");
    std::vector<std::string> extra;
    for (const auto& name : neural_columns())
        if (corpus.columns.count(name))
            extra.push_back(name);
    for (const auto& name : extra)
        table.header.push_back(name);
    if (corpus.has_embeddings())
        for (int k = 0; k < embedding_dim; ++k)
        {
            std::string digits = std::to_string(k);
            while (digits.size() < 3)
                digits.insert(digits.begin(), '0');
            table.header.push_back("emb_" + digits);
        }

    auto real_cell = [](double v) { return std::isnan(v) ? std::string() : format_full(v); };
    for (std::size_t i = 0; i < corpus.posts.size(); ++i)
    {
        const auto& p = corpus.posts[i];
        std::vector<std::string> row{p.post_id,
                                     p.subreddit,
                                     p.author_id,
                                     std::to_string(p.created_utc),
                                     i < corpus.titles.size() ? corpus.titles[i] : p.text,
                                     i < corpus.bodies.size() ? corpus.bodies[i] : std::string(),
                                     std::to_string(p.score),
                                     std::to_string(p.n_awards),
                                     std::to_string(p.n_gold),
                                     p.removed ? "true" : "false"};
        if (with_created)
            row.push_back(p.author_created_utc ? std::to_string(*p.author_created_utc) : std::string());
        for (const auto& name : extra)
            row.push_back(real_cell(corpus.columns.at(name)(static_cast<Index>(i))));
        if (corpus.has_embeddings())
            for (int k = 0; k < embedding_dim; ++k)
                row.push_back(real_cell(corpus.embeddings(static_cast<Index>(i), k)));
        table.rows.push_back(std::move(row));
    }
    return table;
}

const std::array<std::string, 6>& BaselineCovariates::names()
{
    static const std::array<std::string, 6> n{"daily_post_rate",  "daily_removal_rate", "mean_score",
                                              "mean_awards",      "account_age_days",   "trend_days"};
    return n;
}

Eigen::Matrix<double, 6, 1> BaselineCovariates::as_vector() const
{
    Eigen::Matrix<double, 6, 1> v;
    v << daily_post_rate, daily_removal_rate, mean_score, mean_awards, account_age_days, trend_days;
    return v;
}

AuthorBaseline summarize_baseline(std::span<const PostRecord> history, const ObservationWindow& window)
{
    AuthorBaseline b;
    double removals = 0.0, score = 0.0, awards = 0.0;
    for (const auto& p : history)
    {
        if (!window.in_baseline(p.created_utc))
            continue;
        ++b.n_posts;
        removals += p.removed ? 1.0 : 0.0;
        score += static_cast<double>(p.score);
        awards += static_cast<double>(p.n_awards + p.n_gold);
    }
    if (b.n_posts == 0)
        fail(ErrorKind::AuthorIneligible, "author has no post in the baseline window");
    const double days = static_cast<double>(window.baseline_days);
    b.daily_post_rate = b.n_posts / days;
    b.daily_removal_rate = removals / days;
    b.mean_score = score / b.n_posts;
    b.mean_awards = awards / b.n_posts;
    return b;
}

BaselineCovariates covariates_at(const AuthorBaseline& baseline, const ObservationWindow& window,
                                 std::int64_t at_utc, std::int64_t account_created_utc, bool log_scale)
{
    BaselineCovariates z;
    z.daily_post_rate = baseline.daily_post_rate;
    z.daily_removal_rate = baseline.daily_removal_rate;
    z.mean_score = baseline.mean_score;
    z.mean_awards = baseline.mean_awards;
    z.account_age_days = std::max(0.0, static_cast<double>(at_utc - account_created_utc) / seconds_per_day);
    z.trend_days = static_cast<double>(utc_day(at_utc) - utc_day(window.start));
    if (log_scale)
    {
        z.daily_post_rate = std::log1p(z.daily_post_rate);
        z.daily_removal_rate = std::log1p(z.daily_removal_rate);
        z.mean_score = std::copysign(std::log1p(std::abs(z.mean_score)), z.mean_score);
        z.mean_awards = std::log1p(z.mean_awards);
        z.account_age_days = std::log1p(z.account_age_days);
        z.log_scaled = true;
    }
    return z;
}

BaselineCovariates compute_baseline_covariates(std::span<const PostRecord> history, const ObservationWindow& window,
                                               std::int64_t at_utc, std::optional<std::int64_t> account_created_utc,
                                               bool log_scale)
{
    if (history.empty())
        fail(ErrorKind::AuthorIneligible, "empty author history");
    const AuthorBaseline b = summarize_baseline(history, window);
    std::int64_t origin = std::numeric_limits<std::int64_t>::max();
    if (account_created_utc)
        origin = *account_created_utc;
    else
        for (const auto& p : history)
            origin = std::min(origin, p.author_created_utc.value_or(p.created_utc));
    return covariates_at(b, window, at_utc, origin, log_scale);
}

std::string_view to_string(Outcome outcome)
{
    switch (outcome)
    {
    case Outcome::Score: return "score";
    case Outcome::Award: return "award";
    case Outcome::Gold: return "gold";
    }
    return "score";
}

Outcome parse_outcome(std::string_view text)
{
    if (text == "score")
        return Outcome::Score;
    if (text == "award" || text == "awards")
        return Outcome::Award;
    if (text == "gold")
        return Outcome::Gold;
    fail(ErrorKind::ConfigError, "unknown outcome '" + std::string(text) + "' (expected score, award or gold)");
}

bool OutcomeLabels::satisfies(Outcome outcome) const
{
    switch (outcome)
    {
    case Outcome::Score: return high_score;
    case Outcome::Award: return awarded;
    case Outcome::Gold: return gilded;
    }
    return false;
}

double nearest_rank_percentile(std::span<const double> sorted, double percent)
{
    if (sorted.empty())
        fail(ErrorKind::EmptyGroup, "percentile of empty sample");
    const double n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(percent / 100.0 * n - 1e-12));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

LabelingResult label_outcomes(std::span<const PostRecord> posts)
{
    LabelingResult result;
    result.labels.assign(posts.size(), std::nullopt);

    std::map<std::pair<std::string, int>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < posts.size(); ++i)
        groups[{posts[i].subreddit, utc_year_month(posts[i].created_utc)}].push_back(i);

    std::vector<double> scores;
    for (const auto& [key, rows] : groups)
    {
        if (rows.size() < 4)
        {
            result.skipped_groups.push_back(key.first + "/" + std::to_string(key.second));
            continue;
        }
        scores.clear();
        for (auto i : rows)
            scores.push_back(static_cast<double>(posts[i].score));
        std::sort(scores.begin(), scores.end());
        const double p25 = nearest_rank_percentile(scores, 25.0);
        const double p50 = nearest_rank_percentile(scores, 50.0);
        const double p75 = nearest_rank_percentile(scores, 75.0);
        for (auto i : rows)
        {
            const double s = static_cast<double>(posts[i].score);
            OutcomeLabels l;
            l.score_quartile = s > p75 ? 4 : s > p50 ? 3 : s > p25 ? 2 : 1;
            l.high_score = l.score_quartile == 4;
            l.awarded = posts[i].n_awards >= 1;
            l.gilded = posts[i].n_gold >= 1;
            result.labels[i] = l;
        }
    }
    return result;
}

CandidatePool build_candidate_pool(std::span<const PostRecord> posts,
                                   std::span<const std::optional<OutcomeLabels>> labels,
                                   std::span<const bool> eligible, Outcome outcome, int ratio, std::uint64_t seed)
{
    if (labels.size() != posts.size() || eligible.size() != posts.size())
        fail(ErrorKind::ShapeError, "posts, labels and eligibility must align");
    if (ratio < 1)
        fail(ErrorKind::ConfigError, "control ratio must be >= 1");

    CandidatePool pool;
    pool.outcome = outcome;
    pool.sampling_seed = seed;
    pool.ratio = ratio;

    struct Cell
    {
        std::vector<std::size_t> positives;
        std::vector<std::size_t> controls;
    };
    std::map<std::pair<std::string, std::int64_t>, Cell> cells;
    std::map<std::string, int> positives_per_subreddit;

    for (std::size_t i = 0; i < posts.size(); ++i)
    {
        if (!eligible[i] || !labels[i])
            continue;
        const auto& p = posts[i];
        positives_per_subreddit.try_emplace(p.subreddit, 0);
        auto& cell = cells[{p.subreddit, utc_day(p.created_utc)}];
        const bool positive = labels[i]->satisfies(outcome);
        if (positive && !p.removed)
        {
            cell.positives.push_back(i);
            ++positives_per_subreddit[p.subreddit];
        }
        else if (!positive)
        {
            if (outcome == Outcome::Score && labels[i]->score_quartile > 2)
                continue;
            cell.controls.push_back(i);
        }
    }
    for (const auto& [sub, count] : positives_per_subreddit)
        if (count == 0)
            pool.skipped_subreddits.push_back(sub);

    auto by_id = [&](std::size_t a, std::size_t b) { return posts[a].post_id < posts[b].post_id; };
    for (auto& [key, cell] : cells)
    {
        if (cell.positives.empty())
            continue;
        std::sort(cell.positives.begin(), cell.positives.end(), by_id);
        std::sort(cell.controls.begin(), cell.controls.end(), by_id);
        const std::size_t need = static_cast<std::size_t>(ratio) * cell.positives.size();
        std::vector<std::size_t> chosen;
        if (cell.controls.size() <= need)
        {
            chosen = cell.controls;
            if (cell.controls.size() < need)
                pool.undersupplied_cells.push_back(key.first + "/" + format_date(key.second * seconds_per_day));
        }
        else
        {
            // Partial Fisher-Yates on an id-sorted list: the draw depends only on the cell.
            Rng rng = make_rng(hash_combine(seed, fnv1a(key.first)), static_cast<std::uint64_t>(key.second));
            std::vector<std::size_t> pool_rows = cell.controls;
            for (std::size_t k = 0; k < need; ++k)
            {
                const std::size_t j = k + static_cast<std::size_t>(uniform01(rng) * (pool_rows.size() - k));
                std::swap(pool_rows[k], pool_rows[j]);
            }
            chosen.assign(pool_rows.begin(), pool_rows.begin() + static_cast<std::ptrdiff_t>(need));
            std::sort(chosen.begin(), chosen.end(), by_id);
        }
        for (auto i : cell.positives)
        {
            pool.positive_rows.push_back(i);
            pool.positives.push_back(posts[i].post_id);
        }
        for (auto i : chosen)
        {
            pool.control_rows.push_back(i);
            pool.controls.push_back(posts[i].post_id);
        }
    }
    return pool;
}

std::unordered_map<std::string, AuthorBaseline> baselines_by_author(std::span<const PostRecord> posts,
                                                                    const ObservationWindow& window)
{
    std::unordered_map<std::string, AuthorBaseline> acc;
    std::unordered_map<std::string, std::array<double, 3>> sums;
    for (const auto& p : posts)
    {
        if (!window.in_baseline(p.created_utc))
            continue;
        auto& b = acc[p.author_id];
        auto& s = sums[p.author_id];
        ++b.n_posts;
        s[0] += p.removed ? 1.0 : 0.0;
        s[1] += static_cast<double>(p.score);
        s[2] += static_cast<double>(p.n_awards + p.n_gold);
    }
    const double days = static_cast<double>(window.baseline_days);
    for (auto& [author, b] : acc)
    {
        const auto& s = sums[author];
        b.daily_post_rate = b.n_posts / days;
        b.daily_removal_rate = s[0] / days;
        b.mean_score = s[1] / b.n_posts;
        b.mean_awards = s[2] / b.n_posts;
    }
    return acc;
}

std::unordered_map<std::string, std::int64_t> account_origin_by_author(std::span<const PostRecord> posts)
{
    std::unordered_map<std::string, std::int64_t> origin;
    for (const auto& p : posts)
    {
        const std::int64_t t = p.author_created_utc.value_or(p.created_utc);
        auto [it, inserted] = origin.try_emplace(p.author_id, t);
        if (!inserted)
            it->second = std::min(it->second, t);
    }
    return origin;
}

} // namespace approval::corpus
