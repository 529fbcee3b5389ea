#include "helpers.hpp"

#include "approval/adaboost.hpp"
#include "approval/evaluation.hpp"
#include "approval/feature_table.hpp"
#include "approval/stratify.hpp"

#include <map>

using namespace approval;

namespace
{

Matrix gaussian(Index n, Index d, Rng& rng)
{
    Matrix x(n, d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j)
            x(i, j) = standard_normal(rng);
    return x;
}

std::vector<std::string> ids(std::size_t n)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back("p" + std::to_string(1000 + i));
    return out;
}

} // namespace

TEST_CASE("AdaBoost risk model")
{
    SUBCASE("separable covariates")
    {
        Rng rng = make_rng(21);
        const Matrix x = gaussian(400, 6, rng);
        std::vector<bool> y;
        for (Index i = 0; i < x.rows(); ++i)
            y.push_back(x(i, 0) + 0.5 * x(i, 1) > 0.0);
        const auto m = fit_adaboost(x, y, {});
        CHECK(auc(m.predict_proba(x), y) >= 0.99);
        const Vector p = m.predict_proba(x);
        CHECK((p.array() > 0.0).all());
        CHECK((p.array() < 1.0).all());
        const auto again = fit_adaboost(x, y, {});
        CHECK(again.alphas == m.alphas);
        CHECK(again.predict_proba(x) == p);
    }
    SUBCASE("labels independent of covariates")
    {
        double total = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed)
        {
            Rng rng = make_rng(100 + seed);
            const Matrix train = gaussian(1000, 6, rng);
            const Matrix test = gaussian(2000, 6, rng);
            std::vector<bool> ytr, yte;
            for (Index i = 0; i < train.rows(); ++i)
                ytr.push_back(uniform01(rng) < 0.3);
            for (Index i = 0; i < test.rows(); ++i)
                yte.push_back(uniform01(rng) < 0.3);
            AdaBoostConfig cfg;
            cfg.seed = seed;
            const double a = auc(fit_adaboost(train, ytr, cfg).predict_proba(test), yte);
            CHECK(a >= 0.45);
            CHECK(a <= 0.55);
            total += a;
        }
        CHECK(total / 20.0 >= 0.45);
        CHECK(total / 20.0 <= 0.55);
    }
    SUBCASE("only covariate columns are accepted")
    {
        Rng rng = make_rng(5);
        FeatureTable t(ids(40));
        t.add_column({"z", Role::Covariate}, gaussian(40, 1, rng).col(0));
        t.add_column({"flesch", Role::Language}, gaussian(40, 1, rng).col(0));
        std::vector<Index> rows;
        std::vector<bool> y;
        for (Index i = 0; i < 40; ++i)
        {
            rows.push_back(i);
            y.push_back(i % 3 == 0);
        }
        CHECK(testutil::error_kind([&] { fit_risk_model(t, {"z", "flesch"}, rows, y, "s", "award", {}); }) ==
              ErrorKind::ProvenanceError);
        CHECK_NOTHROW(fit_risk_model(t, {"z"}, rows, y, "s", "award", {}));
        const std::vector<Index> few(rows.begin(), rows.begin() + 19);
        const std::vector<bool> fy(y.begin(), y.begin() + 19);
        CHECK(testutil::error_kind([&] { fit_risk_model(t, {"z"}, few, fy, "s", "award", {}); }) ==
              ErrorKind::SubredditSkipped);
    }
}

TEST_CASE("decile binning")
{
    auto sizes = [](const DecileAssignment& d) {
        std::vector<int> s(10, 0);
        for (int k : d.decile)
            ++s[static_cast<std::size_t>(k - 1)];
        return s;
    };
    std::vector<double> s100;
    for (int i = 0; i < 100; ++i)
        s100.push_back(std::sin(i * 1.3));
    CHECK(sizes(assign_deciles(s100, ids(100))) == std::vector<int>(10, 10));

    SUBCASE("25 scores follow the rank rule")
    {
        std::vector<double> s25;
        for (int i = 0; i < 25; ++i)
            s25.push_back(25.0 - i);
        const auto d = assign_deciles(s25, ids(25));
        // oracle: count ranks r with floor(10 r / 25) == b
        std::vector<int> expect(10, 0);
        for (int r = 0; r < 25; ++r)
            ++expect[static_cast<std::size_t>(10 * r / 25)];
        CHECK(sizes(d) == expect);
        CHECK(expect == std::vector<int>{3, 2, 3, 2, 3, 2, 3, 2, 3, 2});
        CHECK(d.decile[0] == 10);
        CHECK(d.decile[24] == 1);
    }
    SUBCASE("ties resolve by post id")
    {
        std::vector<double> flat(20, 0.5);
        auto id = ids(20);
        std::reverse(id.begin(), id.end());
        const auto d = assign_deciles(flat, id);
        CHECK(d.degenerate);
        CHECK(d.decile[19] == 1);
        CHECK(d.decile[0] == 10);
    }
    CHECK(testutil::error_kind([] {
              std::vector<double> s(9, 1.0);
              assign_deciles(s, ids(9));
          }) == ErrorKind::SubredditSkipped);
}

TEST_CASE("standardized mean difference")
{
    const std::vector<double> a{0.0, 2.0}, b{-1.0, 1.0}, c{1.0, 2.0, 3.0};
    CHECK(smd(c, c) == 0.0);
    // means 1 and 0, population variances both 1
    CHECK(smd(a, b) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(smd(b, a) == smd(a, b));
    Eigen::Vector3f f(1.f, 2.f, 3.f);
    Eigen::Vector3f g(2.f, 3.f, 4.f);
    CHECK(smd(f, g) == doctest::Approx(1.0 / std::sqrt(2.0 / 3.0)).epsilon(1e-6));
    CHECK(smd(f, g) >= 0.0);
    CHECK(testutil::error_kind([] { smd(std::vector<double>{}, std::vector<double>{1.0}); }) ==
          ErrorKind::EmptyGroup);
}

TEST_CASE("stratum gating")
{
    StratumDiagnostics ok{"s", 1, 12, 30, {}, 0.2, false, ReasonNone};
    StratumDiagnostics unbalanced{"s", 2, 12, 30, {}, 0.31, false, ReasonNone};
    StratumDiagnostics thin{"s", 3, 9, 50, {}, 0.1, false, ReasonNone};
    const auto g = gate_strata({ok, unbalanced, thin});
    CHECK(g[0].retained);
    CHECK_FALSE(g[1].retained);
    CHECK(reason_text(g[1].reasons) == "balance_fail");
    CHECK_FALSE(g[2].retained);
    CHECK(reason_text(g[2].reasons) == "overlap_fail");
    CHECK(testutil::error_kind([&] { gate_strata({unbalanced, thin}); }) == ErrorKind::PipelineHalt);
    CHECK(testutil::error_kind([&] { gate_strata({ok}, 0.0); }) == ErrorKind::PipelineHalt);
}

TEST_CASE("stratification reduces confounded imbalance")
{
    Rng rng = make_rng(77);
    const Index n = 6000;
    const Matrix z = gaussian(n, 6, rng);
    std::vector<bool> label;
    std::vector<std::string> sub;
    std::vector<double> risk;
    for (Index i = 0; i < n; ++i)
    {
        const double eta = -1.0 + 0.9 * z(i, 0) + 0.6 * z(i, 1);
        label.push_back(uniform01(rng) < 1.0 / (1.0 + std::exp(-eta)));
        sub.push_back(i % 2 ? "a" : "b");
        risk.push_back(eta);
    }
    std::vector<int> decile(static_cast<std::size_t>(n));
    for (const std::string s : {"a", "b"})
    {
        std::vector<double> sc;
        std::vector<std::string> pid;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < sub.size(); ++i)
            if (sub[i] == s)
            {
                sc.push_back(risk[i]);
                pid.push_back("p" + std::to_string(i));
                idx.push_back(i);
            }
        const auto d = assign_deciles(sc, pid);
        for (std::size_t k = 0; k < idx.size(); ++k)
            decile[idx[k]] = d.decile[k];
    }
    auto strata = gate_strata(diagnose_strata(z, sub, decile, label));
    for (const auto& s : strata)
    {
        CHECK(s.mean_smd >= 0.0);
        if (s.retained)
        {
            CHECK(s.positives >= 10);
            CHECK(s.controls >= 10);
            CHECK(s.mean_smd <= 0.30);
        }
    }
    const auto b = summarize_balance(z, label, strata, {"z1", "z2", "z3", "z4", "z5", "z6"});
    CHECK(b.strata_total == 20);
    CHECK(b.stratified_mean < b.unmatched_mean);
    CHECK(b.unmatched.size() == 6);
}
