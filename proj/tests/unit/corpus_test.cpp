#include "helpers.hpp"

#include "approval/corpus.hpp"

#include <algorithm>
#include <memory>
#include <set>

using namespace approval;
using namespace approval::corpus;
using testutil::post;

namespace
{

ObservationWindow window14()
{
    ObservationWindow w;
    w.start = parse_date("2020-05-01");
    w.end = w.start + 44 * seconds_per_day;
    w.baseline_days = 14;
    return w;
}

} // namespace

TEST_CASE("dates and hours")
{
    CHECK(parse_date("1970-01-02") == 86400);
    CHECK(format_date(parse_date("2020-02-29")) == "2020-02-29");
    CHECK(utc_hour(parse_date("2020-05-01") + 5 * 3600 + 59) == 5);
    CHECK(utc_year_month(parse_date("2020-12-31")) == 202012);
}

TEST_CASE("baseline rates")
{
    const auto w = window14();
    std::vector<PostRecord> history;
    for (int d = 0; d < 14; ++d)
        history.push_back(post("p" + std::to_string(d), "s", w.start + d * seconds_per_day));
    const auto b = summarize_baseline(history, w);
    CHECK(b.daily_post_rate == doctest::Approx(1.0));

    SUBCASE("removal rate and mean score")
    {
        const std::vector<std::int64_t> scores{3, 5, 1, 0, 2, 4, 6};
        std::vector<PostRecord> h;
        for (std::size_t i = 0; i < scores.size(); ++i)
            h.push_back(post("q" + std::to_string(i), "s", w.start + static_cast<std::int64_t>(i) * 3600, scores[i], 0,
                             0, i < 2));
        // oracle: 2 removals over 14 days, scores sum 21 over 7 posts
        const auto z = compute_baseline_covariates(h, w, w.baseline_end() + 10);
        CHECK(z.daily_removal_rate == doctest::Approx(2.0 / 14.0).epsilon(1e-12));
        CHECK(z.mean_score == doctest::Approx(3.0));
        CHECK(z.daily_post_rate == doctest::Approx(0.5));
    }

    SUBCASE("no baseline post")
    {
        std::vector<PostRecord> late{post("x", "s", w.baseline_end() + 1)};
        CHECK(testutil::error_kind([&] { summarize_baseline(late, w); }) == ErrorKind::AuthorIneligible);
        CHECK(testutil::error_kind([&] { compute_baseline_covariates({}, w, w.baseline_end()); }) ==
              ErrorKind::AuthorIneligible);
    }
}

TEST_CASE("covariates: account age, trend and log scaling")
{
    const auto w = window14();
    std::vector<PostRecord> h{post("a", "s", w.start + 3600, -4, 1, 1)};
    const std::int64_t at = w.start + 20 * seconds_per_day + 7200;
    const auto raw = compute_baseline_covariates(h, w, at, w.start - 10 * seconds_per_day);
    CHECK(raw.account_age_days == doctest::Approx(30.0 + 7200.0 / 86400.0));
    CHECK(raw.trend_days == 20.0);
    CHECK(raw.mean_awards == doctest::Approx(2.0));
    const auto logged = compute_baseline_covariates(h, w, at, w.start - 10 * seconds_per_day, true);
    CHECK(logged.log_scaled);
    CHECK(logged.mean_score == doctest::Approx(-std::log(5.0)));
    CHECK(logged.account_age_days == doctest::Approx(std::log1p(raw.account_age_days)));
    CHECK(logged.trend_days == 20.0);
    // without a creation time the first observed post is the origin
    const auto first = compute_baseline_covariates(h, w, at);
    CHECK(first.account_age_days == doctest::Approx((at - h[0].created_utc) / 86400.0));
    for (double v : {raw.daily_post_rate, raw.daily_removal_rate, raw.mean_awards, raw.account_age_days})
        CHECK(v >= 0.0);
}

TEST_CASE("newcomer indicator")
{
    CHECK(is_newcomer(89.9));
    CHECK_FALSE(is_newcomer(90.0));
    CHECK_FALSE(is_newcomer(400.0));
}

TEST_CASE("nearest-rank percentile")
{
    const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8};
    // rank ceil(0.75 * 8) = 6
    CHECK(nearest_rank_percentile(v, 75.0) == 6.0);
    CHECK(nearest_rank_percentile(v, 25.0) == 2.0);
    CHECK(nearest_rank_percentile(v, 50.0) == 4.0);
    CHECK(testutil::error_kind([] { nearest_rank_percentile({}, 50.0); }) == ErrorKind::EmptyGroup);
}

TEST_CASE("outcome labels")
{
    const std::int64_t t = parse_date("2020-05-10");
    std::vector<PostRecord> posts;
    for (int s = 1; s <= 8; ++s)
        posts.push_back(post("p" + std::to_string(s), "s", t + s, s, s == 3 ? 1 : 0, s == 4 ? 1 : 0));
    const auto res = label_outcomes(posts);
    std::set<std::int64_t> high;
    for (std::size_t i = 0; i < posts.size(); ++i)
    {
        const auto& l = *res.labels[i];
        if (l.high_score)
            high.insert(posts[i].score);
        CHECK(l.high_score == (l.score_quartile == 4));
        CHECK(l.awarded == (posts[i].n_awards >= 1));
        CHECK(l.gilded == (posts[i].n_gold >= 1));
    }
    CHECK(high == std::set<std::int64_t>{7, 8});
    CHECK(res.labels[2]->awarded);
    CHECK_FALSE(res.labels[2]->gilded);
    CHECK(res.labels[3]->gilded);

    SUBCASE("ties never produce high scores")
    {
        std::vector<PostRecord> flat;
        for (int i = 0; i < 6; ++i)
            flat.push_back(post("f" + std::to_string(i), "s", t, 5));
        for (const auto& l : label_outcomes(flat).labels)
            CHECK_FALSE(l->high_score);
    }
    SUBCASE("groups are subreddit by month")
    {
        std::vector<PostRecord> two{post("a", "s", t, 1), post("b", "s", t, 2), post("c", "s", t, 3),
                                    post("d", "s", parse_date("2020-06-02"), 100)};
        const auto r = label_outcomes(two);
        CHECK(r.skipped_groups.size() == 2);
        CHECK_FALSE(r.labels[3].has_value());
    }
}

namespace
{

struct PoolFixture
{
    std::vector<PostRecord> posts;
    std::vector<std::optional<OutcomeLabels>> labels;
    std::unique_ptr<bool[]> eligible;

    void add(const std::string& id, const std::string& sub, std::int64_t t, bool positive, int quartile = 1,
             bool removed = false)
    {
        auto p = post(id, sub, t, 0, positive ? 1 : 0, 0, removed);
        posts.push_back(p);
        OutcomeLabels l;
        l.awarded = positive;
        l.score_quartile = quartile;
        l.high_score = quartile == 4;
        labels.push_back(l);
    }
    CandidatePool build(Outcome o, int ratio = 3, std::uint64_t seed = 9)
    {
        eligible.reset(new bool[posts.size()]);
        std::fill(eligible.get(), eligible.get() + posts.size(), true);
        return build_candidate_pool(posts, labels, std::span<const bool>(eligible.get(), posts.size()), o, ratio,
                                    seed);
    }
};

} // namespace

TEST_CASE("candidate pool")
{
    const std::int64_t day = parse_date("2020-05-20");
    SUBCASE("ratio 3 with ample supply")
    {
        PoolFixture f;
        for (int i = 0; i < 10; ++i)
            f.add("pos" + std::to_string(i), "s", day + i, true);
        for (int i = 0; i < 45; ++i)
            f.add("ctl" + std::to_string(i), "s", day + 100 + i, false);
        const auto pool = f.build(Outcome::Award);
        CHECK(pool.positives.size() == 10);
        CHECK(pool.controls.size() == 30);
        CHECK(pool.undersupplied_cells.empty());
        CHECK(f.build(Outcome::Award).controls == pool.controls);
    }
    SUBCASE("undersupply keeps every control and is flagged")
    {
        PoolFixture f;
        for (int i = 0; i < 10; ++i)
            f.add("pos" + std::to_string(i), "s", day + i, true);
        for (int i = 0; i < 12; ++i)
            f.add("ctl" + std::to_string(i), "s", day + 100 + i, false);
        const auto pool = f.build(Outcome::Award);
        CHECK(pool.controls.size() == 12);
        CHECK(pool.undersupplied_cells.size() == 1);
    }
    SUBCASE("score controls come from quartiles 1 and 2; same subreddit and day")
    {
        PoolFixture f;
        for (int i = 0; i < 5; ++i)
            f.add("pos" + std::to_string(i), "s", day + i, false, 4);
        for (int i = 0; i < 40; ++i)
            f.add("ctl" + std::to_string(i), "s", day + 50 + i, false, 1 + i % 3);
        for (int i = 0; i < 20; ++i)
            f.add("other" + std::to_string(i), "t", day + i, false, 1);
        for (int i = 0; i < 20; ++i)
            f.add("nextday" + std::to_string(i), "s", day + seconds_per_day + i, false, 1);
        f.add("gone", "s", day + 7, false, 4, true);
        const auto pool = f.build(Outcome::Score);
        CHECK(pool.positives.size() == 5);
        CHECK(pool.controls.size() == 15);
        for (auto r : pool.control_rows)
        {
            CHECK(f.labels[r]->score_quartile <= 2);
            CHECK(f.posts[r].subreddit == "s");
            CHECK(utc_day(f.posts[r].created_utc) == utc_day(day));
        }
        CHECK(std::find(pool.positives.begin(), pool.positives.end(), "gone") == pool.positives.end());
    }
}

TEST_CASE("outcome names")
{
    CHECK(parse_outcome("award") == Outcome::Award);
    CHECK(to_string(Outcome::Gold) == "gold");
    CHECK(testutil::error_kind([] { parse_outcome("likes"); }) == ErrorKind::ConfigError);
}
