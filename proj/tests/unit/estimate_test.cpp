#include "helpers.hpp"

#include "approval/design.hpp"
#include "approval/inference.hpp"
#include "approval/logit.hpp"

#include <algorithm>
#include <cmath>

using namespace approval;

namespace
{

struct Fixture
{
    FeatureTable table;
    DesignInputs in;

    explicit Fixture(Index n, std::uint64_t seed, int subs = 2, int deciles = 2, int days = 3, int hours = 2,
                     bool newcomers = true)
    {
        Rng rng = make_rng(seed);
        std::vector<std::string> ids;
        for (Index i = 0; i < n; ++i)
            ids.push_back("r" + std::to_string(i));
        table = FeatureTable(ids);
        for (const char* name : {"a1", "a2"})
        {
            Vector v(n);
            for (Index i = 0; i < n; ++i)
                v(i) = standard_normal(rng);
            table.add_column({name, Role::Language}, v);
        }
        for (const char* name : {"z1", "z2"})
        {
            Vector v(n);
            for (Index i = 0; i < n; ++i)
                v(i) = standard_normal(rng);
            table.add_column({name, Role::Covariate}, v);
        }
        in.table = &table;
        for (Index i = 0; i < n; ++i)
        {
            const double eta = -0.3 + 0.5 * table.col("a1")(i) - 0.4 * table.col("z1")(i);
            in.response.push_back(uniform01(rng) < 1.0 / (1.0 + std::exp(-eta)));
            in.newcomer.push_back(newcomers && uniform01(rng) < 0.3);
            const int s = static_cast<int>(i % subs);
            in.stratum.push_back("s" + std::to_string(s) + "|" + std::to_string(1 + (i / subs) % deciles));
            in.day.push_back("d" + std::to_string(i % days));
            in.hour.push_back("h" + std::to_string((i / 7) % hours));
            in.cluster.push_back("s" + std::to_string(s));
        }
    }

    ModelSpec spec(bool fe = true) const
    {
        ModelSpec m;
        m.outcome = "award";
        m.language_terms = {"a1", "a2"};
        m.covariate_terms = {"z1", "z2"};
        m.fixed_effects = fe;
        return m;
    }
};

std::size_t count_prefix(const std::vector<std::string>& names, const std::string& prefix)
{
    return static_cast<std::size_t>(
        std::count_if(names.begin(), names.end(), [&](const std::string& s) { return s.rfind(prefix, 0) == 0; }));
}

// Explicit sandwich: bread from p(1-p) x x' plus ridge, meat from per-cluster score sums.
Matrix brute_sandwich(const Matrix& x, const Vector& y, const Vector& beta, const std::vector<int>& cluster,
                      const Vector& ridge_diag)
{
    const Index n = x.rows(), p = x.cols();
    Matrix h = Matrix::Zero(p, p);
    const int g_count = *std::max_element(cluster.begin(), cluster.end()) + 1;
    Matrix u = Matrix::Zero(g_count, p);
    for (Index i = 0; i < n; ++i)
    {
        double eta = 0.0;
        for (Index j = 0; j < p; ++j)
            eta += x(i, j) * beta(j);
        const double pi = 1.0 / (1.0 + std::exp(-eta));
        for (Index a = 0; a < p; ++a)
        {
            u(cluster[static_cast<std::size_t>(i)], a) += x(i, a) * (y(i) - pi);
            for (Index b = 0; b < p; ++b)
                h(a, b) += pi * (1.0 - pi) * x(i, a) * x(i, b);
        }
    }
    for (Index a = 0; a < p; ++a)
        h(a, a) += ridge_diag(a);
    Matrix meat = Matrix::Zero(p, p);
    for (int g = 0; g < g_count; ++g)
        meat += u.row(g).transpose() * u.row(g);
    const Matrix hinv = h.inverse();
    return hinv * meat * hinv * (static_cast<double>(g_count) / (g_count - 1));
}

} // namespace

TEST_CASE("design columns")
{
    Fixture f(240, 1, 2, 2, 3, 2);
    const auto d = build_design(f.in, f.spec());
    // |A| + |A| + |Z| + NEW + (4 + 3 + 2 levels) - 3 references + intercept
    CHECK(d.cols() == 2 + 2 + 2 + 1 + (4 + 3 + 2) - 3 + 1);
    const auto names = d.column_names();
    CHECK(count_prefix(names, "stratum[") == 3);
    CHECK(count_prefix(names, "day[") == 2);
    CHECK(count_prefix(names, "hour[") == 1);
    CHECK(names.size() == static_cast<std::size_t>(d.cols()));
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    CHECK((d.to_dense() * Vector::Ones(d.cols()) - d.linear_predictor(Vector::Ones(d.cols()))).norm() < 1e-10);

    SUBCASE("no newcomers drops the interaction columns")
    {
        Fixture g(120, 2, 2, 2, 3, 2, false);
        const auto dd = build_design(g.in, g.spec());
        CHECK(count_prefix(dd.column_names(), "a1:NEW") == 0);
        CHECK(std::find(dd.dropped.begin(), dd.dropped.end(), "a1:NEW: constant zero") != dd.dropped.end());
        CHECK(std::find(dd.dropped.begin(), dd.dropped.end(), "NEW: constant zero") != dd.dropped.end());
    }
    SUBCASE("collinear language columns are pruned")
    {
        Fixture g(200, 3);
        g.table.add_column({"a3", Role::Language}, (g.table.col("a1") * 2.0 - g.table.col("a2")).eval());
        auto spec = g.spec();
        spec.language_terms.push_back("a3");
        const auto dd = build_design(g.in, spec);
        CHECK(std::find(dd.dropped.begin(), dd.dropped.end(), "a3: collinear") != dd.dropped.end());
    }
    SUBCASE("a level with one outcome is absorbed")
    {
        Fixture g(200, 4);
        for (std::size_t i = 0; i < g.in.response.size(); ++i)
            if (g.in.day[i] == "d2")
                g.in.response[i] = true;
        const auto dd = build_design(g.in, g.spec());
        CHECK(dd.separation_flag);
        CHECK(dd.absorbed == std::vector<std::string>{"day[d2]"});
        CHECK(dd.offset.maxCoeff() == absorbed_offset);
    }
}

TEST_CASE("logistic fit")
{
    SUBCASE("intercept only")
    {
        Fixture f(200, 5);
        for (std::size_t i = 0; i < 200; ++i)
            f.in.response[i] = i % 4 == 0;
        ModelSpec m;
        m.interactions = false;
        m.newcomer_main = false;
        m.fixed_effects = false;
        const auto fit = fit_logit(build_design(f.in, m));
        CHECK(fit.beta(0) == doctest::Approx(std::log(0.25 / 0.75)).epsilon(1e-9));
    }
    SUBCASE("2x2 table gives its log odds ratio")
    {
        // x = 1: 30 positive, 20 negative; x = 0: 15 positive, 35 negative
        std::vector<std::string> ids;
        Vector x(100);
        DesignInputs in;
        for (int i = 0; i < 100; ++i)
        {
            ids.push_back("r" + std::to_string(i));
            x(i) = i < 50 ? 1.0 : 0.0;
            in.response.push_back(i < 50 ? i < 30 : i < 65);
            in.newcomer.push_back(false);
            in.cluster.push_back(std::to_string(i % 5));
        }
        FeatureTable t(ids);
        t.add_column({"x", Role::Language}, x);
        in.table = &t;
        ModelSpec m;
        m.language_terms = {"x"};
        m.interactions = false;
        m.newcomer_main = false;
        m.fixed_effects = false;
        const auto fit = fit_logit(build_design(in, m));
        CHECK(std::abs(fit.beta(1) - std::log(30.0 * 35.0 / (20.0 * 15.0))) < 1e-6);
    }
    SUBCASE("analytic gradient against central differences")
    {
        Fixture f(300, 6);
        const auto d = build_design(f.in, f.spec());
        const auto fit = fit_logit(d);
        CHECK(fit.converged);
        CHECK(fit.trace.back().gradient_max < 1e-8);
        Rng rng = make_rng(8);
        for (int trial = 0; trial < 3; ++trial)
        {
            Vector b = fit.beta;
            for (Index j = 0; j < b.size(); ++j)
                b(j) += 0.3 * standard_normal(rng);
            const Vector g = penalized_gradient(d, b, 0.5);
            Vector fd(b.size());
            const double h = 1e-5;
            for (Index j = 0; j < b.size(); ++j)
            {
                Vector up = b, dn = b;
                up(j) += h;
                dn(j) -= h;
                fd(j) = (penalized_loglik(d, up, 0.5) - penalized_loglik(d, dn, 0.5)) / (2 * h);
            }
            CHECK((g - fd).cwiseAbs().maxCoeff() / g.cwiseAbs().maxCoeff() < 1e-6);
        }
    }
    SUBCASE("failures")
    {
        Fixture f(100, 7);
        const auto d = build_design(f.in, f.spec());
        LogitOptions o;
        o.max_iter = 1;
        CHECK(testutil::error_kind([&] { fit_logit(d, o); }) == ErrorKind::MaxIterExceeded);
        o.throw_on_max_iter = false;
        CHECK_FALSE(fit_logit(d, o).converged);
        Fixture one(100, 8, 1);
        const auto d1 = build_design(one.in, one.spec());
        const auto fit1 = fit_logit(d1);
        CHECK(testutil::error_kind([&] { cluster_robust_cov(d1, fit1); }) == ErrorKind::SingleClusterError);
        f.table.col("a2")(3) = std::nan("");
        CHECK(testutil::error_kind([&] { build_design(f.in, f.spec()); }) == ErrorKind::NumericError);
    }
}

TEST_CASE("cluster-robust covariance")
{
    SUBCASE("20 rows in 4 clusters")
    {
        Fixture f(20, 9);
        for (std::size_t i = 0; i < 20; ++i)
        {
            f.in.cluster[i] = "c" + std::to_string(i / 5);
            f.in.response[i] = (i * 7) % 3 == 0;
        }
        ModelSpec m = f.spec(false);
        m.interactions = false;
        m.newcomer_main = false;
        const auto d = build_design(f.in, m);
        const auto fit = fit_logit(d);
        const Matrix v = cluster_robust_cov(d, fit);
        const Matrix oracle = brute_sandwich(d.to_dense(), d.y, fit.beta, d.cluster, fit.ridge * ridge_mask(d));
        CHECK((v - oracle).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((v - v.transpose()).cwiseAbs().maxCoeff() < 1e-14);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(v);
        CHECK(eig.eigenvalues().minCoeff() > -1e-12);
    }
    SUBCASE("singleton clusters match the heteroskedasticity-robust form")
    {
        Fixture f(60, 10);
        for (std::size_t i = 0; i < 60; ++i)
            f.in.cluster[i] = "c" + std::to_string(i);
        ModelSpec m = f.spec(false);
        const auto d = build_design(f.in, m);
        const auto fit = fit_logit(d);
        const Matrix x = d.to_dense();
        Matrix meat = Matrix::Zero(x.cols(), x.cols());
        for (Index i = 0; i < x.rows(); ++i)
        {
            const double r = d.y(i) - fit.fitted(i);
            meat += r * r * x.row(i).transpose() * x.row(i);
        }
        const Matrix hinv = fit.model_cov;
        const Matrix hc = hinv * meat * hinv * (60.0 / 59.0);
        CHECK((cluster_robust_cov(d, fit) - hc).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("duplicating every cluster")
    {
        Fixture f(120, 11, 4);
        Fixture twice(240, 11, 4);
        for (std::size_t i = 0; i < 240; ++i)
        {
            const std::size_t src = i % 120;
            twice.in.response[i] = f.in.response[src];
            twice.in.newcomer[i] = f.in.newcomer[src];
            twice.in.stratum[i] = f.in.stratum[src];
            twice.in.day[i] = f.in.day[src];
            twice.in.hour[i] = f.in.hour[src];
            twice.in.cluster[i] = f.in.cluster[src] + (i < 120 ? "" : "_copy");
        }
        for (const auto& c : twice.table.names())
            for (Index i = 0; i < 240; ++i)
                twice.table.col(c)(i) = f.table.col(c)(i % 120);
        LogitOptions o;
        o.ridge = 0.0;
        const auto d1 = build_design(f.in, f.spec());
        const auto d2 = build_design(twice.in, twice.spec());
        const auto fit1 = fit_logit(d1, o);
        const auto fit2 = fit_logit(d2, o);
        const Vector se1 = cluster_robust_cov(d1, fit1).diagonal().cwiseSqrt();
        const Vector se2 = cluster_robust_cov(d2, fit2).diagonal().cwiseSqrt();
        const double g = 4.0;
        const double factor = std::sqrt(2.0) * std::sqrt((g / (g - 1)) / ((2 * g) / (2 * g - 1)));
        for (Index j = 0; j < se1.size(); ++j)
        {
            const double z1 = fit1.beta(j) / se1(j);
            const double z2 = fit2.beta(j) / se2(j);
            CHECK(z2 / z1 == doctest::Approx(factor).epsilon(1e-6));
        }
    }
}

TEST_CASE("Benjamini-Hochberg")
{
    CHECK(bh_fdr(std::vector<double>{0.03}) == std::vector<double>{0.03});
    for (double q : bh_fdr(std::vector<double>{0.01, 0.02, 0.03, 0.04}))
        CHECK(q == doctest::Approx(0.04).epsilon(1e-12));
    for (double q : bh_fdr(std::vector<double>{1.0, 1.0, 1.0}))
        CHECK(q == 1.0);
    CHECK(testutil::error_kind([] { bh_fdr(std::vector<double>{0.5, 1.5}); }) == ErrorKind::InvalidPValue);

    Rng rng = make_rng(3);
    for (int trial = 0; trial < 50; ++trial)
    {
        std::vector<double> p(1 + trial % 17);
        for (auto& v : p)
            v = std::pow(uniform01(rng), 3.0);
        const auto q = bh_fdr(p);
        const std::size_t m = p.size();
        // brute-force step-up: q_i = min over p_j >= p_i of p_j m / rank_j
        std::vector<double> sorted = p;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < m; ++i)
        {
            double best = 1.0;
            for (std::size_t k = 0; k < m; ++k)
                if (sorted[k] >= p[i])
                {
                    const auto rank = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), sorted[k]) -
                                                          sorted.begin());
                    best = std::min(best, sorted[k] * static_cast<double>(m) / rank);
                }
            CHECK(q[i] == doctest::Approx(best).epsilon(1e-12));
            CHECK(q[i] >= p[i]);
        }
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] < p[b]; });
        for (std::size_t k = 1; k < m; ++k)
            CHECK(q[order[k]] >= q[order[k - 1]]);
        auto shuffled = p;
        std::reverse(shuffled.begin(), shuffled.end());
        auto qr = bh_fdr(shuffled);
        std::reverse(qr.begin(), qr.end());
        CHECK(qr == q);
    }
}

TEST_CASE("effect rows")
{
    const auto zero = make_effect_row("x", TermFamily::Main, 0.0, 0.2);
    CHECK(zero.odds_ratio == 1.0);
    CHECK(zero.ci_low < 1.0);
    CHECK(zero.ci_high > 1.0);
    CHECK(zero.p == doctest::Approx(1.0));

    const auto r = make_effect_row("pc_01", TermFamily::Main, std::log(1.43), 0.05);
    CHECK(r.odds_ratio == doctest::Approx(1.43));
    CHECK(r.ci_low == doctest::Approx(std::exp(std::log(1.43) - 1.96 * 0.05)));
    CHECK(r.ci_high == doctest::Approx(std::exp(std::log(1.43) + 1.96 * 0.05)));
    CHECK(r.p == doctest::Approx(2.0 * 0.5 * std::erfc(std::log(1.43) / 0.05 / std::sqrt(2.0))));
    CHECK(normal_two_sided_p(1.96) == doctest::Approx(0.04999579029644087).epsilon(1e-9));
    CHECK(normal_two_sided_p(3.2) == doctest::Approx(0.0013742758758316942).epsilon(1e-9));

    CHECK(tier_from_q(0.0005) == Tier::ThreeStar);
    CHECK(tier_from_q(0.001) == Tier::TwoStar);
    CHECK(tier_from_q(0.009) == Tier::TwoStar);
    CHECK(tier_from_q(0.03) == Tier::OneStar);
    CHECK(tier_from_q(0.05) == Tier::NotSignificant);
    CHECK(tier_text(Tier::ThreeStar) == "***");
    CHECK(tier_text(Tier::NotSignificant) == "ns");
    CHECK(make_effect_row("q", TermFamily::Main, std::log(0.71), 0.05).odds_ratio == doctest::Approx(0.71));

    // t reference with clustered df; scipy.stats.t.sf values
    const auto t19 = make_effect_row("pc_01", TermFamily::Main, std::log(1.43), 0.05, 19.0);
    CHECK(t19.p == doctest::Approx(8.464495412842094e-07).epsilon(1e-8));
    CHECK(t19.p > r.p);
    CHECK(t19.ci_low == r.ci_low);
    CHECK(t19.ci_high == r.ci_high);
    CHECK(make_effect_row("x", TermFamily::Main, 2.5, 1.0, 19.0).p ==
          doctest::Approx(0.021740411168397436).epsilon(1e-10));
}

TEST_CASE("effect tables and newcomer composition")
{
    Fixture f(400, 12, 4);
    const auto d = build_design(f.in, f.spec());
    const auto fit = fit_logit(d);
    const auto v = cluster_robust_cov(d, fit);
    const auto rep = effect_tables(fit, v, "award");
    CHECK(rep.main.size() == 2);
    CHECK(rep.interaction.size() == 2);
    CHECK(rep.controls.size() == 3);
    for (const auto& row : rep.main)
    {
        CHECK(row.q >= row.p);
        CHECK(row.tier == tier_from_q(row.q));
        CHECK(std::log(row.ci_high) - row.beta == doctest::Approx(1.96 * row.se));
    }
    for (const auto& row : rep.controls)
        CHECK(row.q == row.p);

    const auto rep_t = effect_tables(fit, v, "award", 3.0);
    CHECK(rep_t.df == 3.0);
    for (std::size_t k = 0; k < rep.main.size(); ++k)
    {
        CHECK(rep_t.main[k].z == rep.main[k].z);
        CHECK(rep_t.main[k].p >= rep.main[k].p);
    }

    const auto table = newcomer_composition(rep);
    CHECK(table.rows.size() == 2);
    for (const auto& row : table.rows)
        CHECK(row.or_new == doctest::Approx(row.or_vet * row.or_interaction));

    EffectReport manual;
    auto vet = make_effect_row("flesch", TermFamily::Main, std::log(1.40), 0.01);
    auto inter = make_effect_row("flesch", TermFamily::Interaction, std::log(1.18), 0.01);
    auto vet2 = make_effect_row("other_informal", TermFamily::Main, std::log(0.98), 0.01);
    auto inter2 = make_effect_row("other_informal", TermFamily::Interaction, std::log(0.97), 0.01);
    auto flat = make_effect_row("we", TermFamily::Main, std::log(1.2), 0.01);
    auto unit = make_effect_row("we", TermFamily::Interaction, 0.0, 0.01);
    manual.main = {vet, vet2, flat};
    manual.interaction = {inter, inter2, unit};
    const auto n = newcomer_composition(manual);
    REQUIRE(n.rows.size() == 3);
    CHECK(format_fixed(n.rows[0].or_new, 2) == "1.65");
    CHECK(n.rows[0].or_new == doctest::Approx(1.652));
    CHECK(format_fixed(n.rows[1].or_new, 2) == "0.95");
    CHECK(n.rows[1].or_new == doctest::Approx(0.9506));
    CHECK(n.rows[2].or_new == doctest::Approx(n.rows[2].or_vet));
}
