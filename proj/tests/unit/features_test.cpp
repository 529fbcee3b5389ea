#include "helpers.hpp"

#include "approval/compositional.hpp"
#include "approval/exemplars.hpp"
#include "approval/feature_table.hpp"
#include "approval/lda.hpp"
#include "approval/lexicon.hpp"
#include "approval/pca.hpp"
#include "approval/residual.hpp"
#include "approval/text.hpp"

#include <cmath>
#include <numeric>
#include <set>

using namespace approval;

namespace
{

double corr(const Vector& a, const Vector& b)
{
    const Vector ca = a.array() - a.mean();
    const Vector cb = b.array() - b.mean();
    return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

lexicon::LexiconHierarchy family_lexicon()
{
    lexicon::LexiconHierarchy lex;
    lex.add_category("family", {"mom*", "dad*"});
    lex.add_category("talk", {"said", "hi"});
    return lex;
}

} // namespace

TEST_CASE("tokenizer")
{
    CHECK(text::tokenize("Don't STOP, me-now!") == std::vector<std::string>{"don't", "stop", "me", "now"});
    CHECK(text::tokenize("  ").empty());
}

TEST_CASE("lexicon percentages")
{
    const auto lex = family_lexicon();
    auto m = lexicon::lexicon_percentage_map({"mom", "said", "hi"}, lex);
    // oracle: 1 of 3 tokens matches mom*
    CHECK(m["family"] == doctest::Approx(100.0 / 3.0).epsilon(1e-12));
    CHECK(lexicon::lexicon_percentage_map({"zebra"}, lex)["family"] == 0.0);
    CHECK(lexicon::lexicon_percentage_map({"mommy", "dads"}, lex)["family"] == 100.0);
    CHECK(testutil::error_kind([&] { lexicon::lexicon_percentages({}, lex); }) == ErrorKind::EmptyText);

    SUBCASE("hierarchy file and invariants")
    {
        const auto parsed = lexicon::LexiconHierarchy::parse("# c\na\tx,y*\nb\tz\nu\tx,z\numbrella:u\ta,b\n");
        CHECK(parsed.categories().size() == 3);
        CHECK(parsed.umbrella_children().at("u") == std::vector<std::string>{"a", "b"});
        CHECK_NOTHROW(parsed.validate());
        lexicon::LexiconHierarchy bad = parsed;
        bad.add_umbrella("v", {"a"});
        bad.add_category("v", {"q"});
        CHECK(testutil::error_kind([&] { bad.validate(); }) == ErrorKind::ConfigError);
        lexicon::LexiconHierarchy upper;
        CHECK(testutil::error_kind([&] { upper.add_category("c", {"Mom"}); }) == ErrorKind::ConfigError);
    }
}

TEST_CASE("Flesch reading ease")
{
    // 206.835 - 1.015 * 1 - 84.6 * 1
    CHECK(text::flesch_reading_ease("Go.") == doctest::Approx(121.22).epsilon(1e-12));
    // 6 words, 1 sentence, 6 syllables
    CHECK(text::flesch_reading_ease("The cat sat on the mat.") == doctest::Approx(116.145).epsilon(1e-12));
    const std::string t = "Readability rests on sentence length. Short words help everyone!";
    CHECK(text::flesch_reading_ease(t + " " + t) == doctest::Approx(text::flesch_reading_ease(t)).epsilon(1e-12));
    CHECK(testutil::error_kind([] { text::flesch_reading_ease("..."); }) == ErrorKind::EmptyText);
}

TEST_CASE("question ratio")
{
    CHECK(text::question_ratio("How? Why?") == 1.0);
    CHECK(text::question_ratio("Hello. How are you?") == 0.5);
    CHECK(text::question_ratio("One. Two! Three?") == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(text::question_ratio("Really?! Yes.") == 0.5);
    const std::string t = "Is it? It is. Maybe!";
    CHECK(text::question_ratio(t + " " + t) == doctest::Approx(text::question_ratio(t)));
}

TEST_CASE("lexicon percentages are invariant to duplication")
{
    const auto lex = family_lexicon();
    const auto tokens = text::tokenize("mom said hi to dad and the dog");
    auto doubled = tokens;
    doubled.insert(doubled.end(), tokens.begin(), tokens.end());
    CHECK(lexicon::lexicon_percentages(tokens, lex) == lexicon::lexicon_percentages(doubled, lex));
}

TEST_CASE("residualized umbrella")
{
    lexicon::LexiconHierarchy lex;
    lex.add_category("c1", {"a"});
    lex.add_category("c2", {"b"});
    lex.add_category("u", {"a", "b", "c"});
    lex.add_umbrella("u", {"c1", "c2"});

    const Index n = 200;
    Rng rng = make_rng(5);
    Vector c1(n), c2(n), own(n);
    for (Index i = 0; i < n; ++i)
    {
        c1(i) = 10.0 * uniform01(rng);
        c2(i) = 5.0 * uniform01(rng);
        own(i) = standard_normal(rng);
    }
    std::vector<std::string> ids;
    for (Index i = 0; i < n; ++i)
        ids.push_back("r" + std::to_string(i));
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);

    SUBCASE("exact sum leaves zeros")
    {
        FeatureTable t(ids);
        t.add_column({"c1"}, c1);
        t.add_column({"c2"}, c2);
        t.add_column({"u"}, c1 + c2);
        fit_residual_umbrellas(t, lex, all);
        CHECK(t.col("other_u").cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("residual is uncorrelated with every child")
    {
        FeatureTable t(ids);
        t.add_column({"c1"}, c1);
        t.add_column({"c2"}, c2);
        t.add_column({"u"}, (0.7 * c1 + 1.3 * c2 + own).eval());
        const auto fits = fit_residual_umbrellas(t, lex, all);
        REQUIRE(fits.size() == 1);
        CHECK(fits[0].residual_column == "other_u");
        CHECK_FALSE(t.find("u").has_value());
        CHECK(std::abs(corr(t.col("other_u"), c1)) < 1e-8);
        CHECK(std::abs(corr(t.col("other_u"), c2)) < 1e-8);
        // normal-equations oracle for the slopes
        Matrix x(n, 3);
        x << Vector::Ones(n), c1, c2;
        const Vector u = 0.7 * c1 + 1.3 * c2 + own;
        const Vector b = (x.transpose() * x).ldlt().solve(x.transpose() * u);
        CHECK(fits[0].weights.at("c1") == doctest::Approx(b(1)).epsilon(1e-9));
        CHECK(fits[0].weights.at("c2") == doctest::Approx(b(2)).epsilon(1e-9));
    }
    SUBCASE("single uncorrelated child gives the centred umbrella")
    {
        lexicon::LexiconHierarchy one;
        one.add_category("c1", {"a"});
        one.add_category("u", {"a", "b"});
        one.add_umbrella("u", {"c1"});
        // child symmetric and umbrella even in it: zero sample covariance
        Vector child(8), umb(8);
        child << -3, -1, 1, 3, -3, -1, 1, 3;
        umb << 2, 5, 5, 2, 4, 1, 1, 4;
        std::vector<std::string> rid;
        for (int i = 0; i < 8; ++i)
            rid.push_back("r" + std::to_string(i));
        FeatureTable t(rid);
        t.add_column({"c1"}, child);
        t.add_column({"u"}, umb);
        fit_residual_umbrellas(t, one, {0, 1, 2, 3, 4, 5, 6, 7});
        const Vector expect = umb.array() - umb.mean();
        CHECK((t.col("other_u") - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("centred log-ratio")
{
    Eigen::Vector2d two(0.8, 0.2);
    const Vector c2 = clr_transform(two, 0.0);
    CHECK(c2(0) == doctest::Approx(std::log(0.8 / 0.4)).epsilon(1e-12));
    CHECK(c2(1) == doctest::Approx(std::log(0.2 / 0.4)).epsilon(1e-12));

    Eigen::Vector3d three(0.7, 0.2, 0.1);
    const Vector c3 = clr_transform(three, 0.0);
    const double g = std::cbrt(0.7 * 0.2 * 0.1);
    CHECK(c3(0) == doctest::Approx(std::log(0.7 / g)).epsilon(1e-12));
    CHECK(c3(1) == doctest::Approx(std::log(0.2 / g)).epsilon(1e-12));
    CHECK(c3(2) == doctest::Approx(std::log(0.1 / g)).epsilon(1e-12));
    CHECK(std::abs(c3(0) - 1.06622) < 5e-6);
    CHECK(std::abs(c3(1) + 0.18654) < 5e-6);
    CHECK(std::abs(c3(2) + 0.87969) < 5e-6);
    CHECK(std::abs(c3.sum()) < 1e-9);

    const Vector uni = clr_transform(Vector::Constant(5, 0.2).eval());
    CHECK(uni.cwiseAbs().maxCoeff() < 1e-12);

    Eigen::Vector3d zero(1.0, 0.0, 0.0);
    CHECK(testutil::error_kind([&] { clr_transform(zero, 0.0); }) == ErrorKind::InvalidComposition);
    CHECK(std::isfinite(clr_transform(zero)(1)));
    Eigen::Vector3d neg(1.1, -0.1, 0.0);
    CHECK(testutil::error_kind([&] { clr_transform(neg); }) == ErrorKind::InvalidComposition);

    Eigen::Matrix<float, 2, 3> rows;
    rows << 0.5f, 0.25f, 0.25f, 0.2f, 0.3f, 0.5f;
    const auto fc = clr_transform(rows, 0.0f);
    CHECK(std::abs(fc.row(1).sum()) < 1e-6f);
    CHECK(drop_coordinate(fc, 2).cols() == 2);

    const auto mix = make_topic_mixture(three);
    CHECK(mix.dropped_index == 2);
}

TEST_CASE("LDA recovers planted topics")
{
    std::vector<std::string> va{"apple", "pear", "plum", "grape", "melon", "fig"};
    std::vector<std::string> vb{"rocket", "orbit", "comet", "lunar", "probe", "nebula"};
    Rng rng = make_rng(11);
    std::vector<std::vector<std::string>> docs;
    std::vector<int> truth;
    for (int d = 0; d < 40; ++d)
    {
        const auto& v = d % 2 ? vb : va;
        std::vector<std::string> doc;
        for (int w = 0; w < 60; ++w)
            doc.push_back(v[static_cast<std::size_t>(uniform01(rng) * 6)]);
        docs.push_back(doc);
        truth.push_back(d % 2);
    }
    docs.push_back({});
    LdaConfig cfg;
    cfg.topics = 2;
    cfg.alpha = 0.1;
    cfg.sweeps = 300;
    cfg.average_last = 50;
    cfg.seed = 3;
    const auto r = fit_lda(docs, cfg);
    const Index first = r.proportions(0, 0) > 0.5 ? 0 : 1;
    for (int d = 0; d < 40; ++d)
    {
        const Index topic = truth[static_cast<std::size_t>(d)] == 0 ? first : 1 - first;
        CHECK(r.proportions(d, topic) > 0.9);
    }
    for (Index d = 0; d < r.proportions.rows(); ++d)
        CHECK(std::abs(r.proportions.row(d).sum() - 1.0) < 1e-9);
    CHECK(r.empty_document.back());
    CHECK(r.proportions(40, 0) == doctest::Approx(0.5));

    const auto again = fit_lda(docs, cfg);
    CHECK(again.proportions == r.proportions);
    CHECK(LdaConfig{}.alpha <= 0.0);
    CHECK(fit_lda(docs, LdaConfig{2, -1.0, 0.01, 5, 2, 1}).alpha == doctest::Approx(25.0));
}

TEST_CASE("PCA on embeddings")
{
    SUBCASE("rank-one data")
    {
        Rng rng = make_rng(2);
        Vector dir(384);
        for (Index j = 0; j < 384; ++j)
            dir(j) = standard_normal(rng);
        Matrix x(50, 384);
        for (Index i = 0; i < 50; ++i)
            x.row(i) = (0.3 + standard_normal(rng)) * dir.transpose();
        const auto m = fit_pca(x, 10);
        CHECK(m.explained_variance_ratio(0) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(m.explained_variance_ratio.tail(9).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("isotropic sample and component invariants")
    {
        Rng rng = make_rng(3);
        Matrix x(10000, 384);
        for (Index i = 0; i < x.rows(); ++i)
            for (Index j = 0; j < x.cols(); ++j)
                x(i, j) = standard_normal(rng);
        const auto m = fit_pca(x, 384);
        CHECK((m.explained_variance_ratio.array() - 1.0 / 384.0).abs().maxCoeff() < 0.002);
        for (Index k = 1; k < 384; ++k)
            CHECK(m.explained_variance_ratio(k) <= m.explained_variance_ratio(k - 1));
        const Matrix gram = m.components.transpose() * m.components;
        CHECK((gram - Matrix::Identity(384, 384)).cwiseAbs().maxCoeff() < 1e-8);
        const Matrix scores = pc_scores(x.topRows(20), m);
        const Matrix back = (scores * m.components.transpose()).rowwise() + m.mean.transpose();
        CHECK((back - x.topRows(20)).cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("scores")
    {
        Rng rng = make_rng(4);
        Matrix x(40, 12);
        for (Index i = 0; i < x.rows(); ++i)
            for (Index j = 0; j < x.cols(); ++j)
                x(i, j) = standard_normal(rng) * (1.0 + j);
        const auto m = fit_pca(x, 5);
        const Matrix mean_row = m.mean.transpose();
        CHECK(pc_scores(mean_row, m).cwiseAbs().maxCoeff() < 1e-12);
        const Matrix shifted = (m.mean + m.components.col(0)).transpose();
        const Matrix s1 = pc_scores(shifted, m);
        CHECK(s1(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(s1.rightCols(4).cwiseAbs().maxCoeff() < 1e-10);
        const Matrix s = pc_scores(x, m);
        for (Index i = 0; i < x.rows(); ++i)
            for (Index k = 0; k < 5; ++k)
            {
                double dot = 0.0;
                for (Index j = 0; j < 12; ++j)
                    dot += (x(i, j) - m.mean(j)) * m.components(j, k);
                CHECK(std::abs(s(i, k) - dot) < 1e-10);
            }
        const Eigen::MatrixXf xf = x.cast<float>();
        CHECK(fit_pca(xf, 2).components.rows() == 12);
        CHECK(testutil::error_kind([&] { pc_scores(Matrix(2, 3), m); }) == ErrorKind::ShapeError);
        CHECK(testutil::error_kind([&] { fit_pca(x.topRows(5), 5); }) == ErrorKind::InsufficientRows);
    }
}

TEST_CASE("exemplars")
{
    std::vector<std::string> ids;
    for (int i = 0; i < 60; ++i)
        ids.push_back("id" + std::to_string(100 + i));
    Matrix s(60, 1);
    for (Index i = 0; i < 60; ++i)
        s(i, 0) = static_cast<double>(i);
    const auto set = export_exemplars(s, ids, 30);
    const auto& c = set.components[0];
    std::set<Index> all(c.top.begin(), c.top.end());
    all.insert(c.bottom.begin(), c.bottom.end());
    CHECK(all.size() == 60);
    for (Index i = 0; i < 30; ++i)
        CHECK(c.bottom[static_cast<std::size_t>(i)] == i);
    CHECK(c.top[0] == 59);

    SUBCASE("ties at the boundary pick the smaller post_id")
    {
        Matrix t(4, 1);
        t << 1.0, 0.0, 1.0, 2.0;
        const std::vector<std::string> tid{"b", "c", "a", "d"};
        const auto e = export_exemplars(t, tid, 1);
        CHECK(e.components[0].top == std::vector<Index>{3});
        const auto e2 = export_exemplars(t, tid, 2);
        CHECK(e2.components[0].bottom == std::vector<Index>{1, 2});
        CHECK(e2.components[0].top == std::vector<Index>{3, 2});
    }
    SUBCASE("k reduced for small inputs")
    {
        const auto e = export_exemplars(s.topRows(9), std::vector<std::string>(ids.begin(), ids.begin() + 9), 30);
        CHECK(e.reduced);
        CHECK(e.k == 4);
    }
}

TEST_CASE("standardization")
{
    FeatureTable t({"a", "b", "c"});
    Vector x(3), k(3), already(3), aux(3);
    x << 1, 2, 3;
    k << 4, 4, 4;
    already << -std::sqrt(1.5), 0.0, std::sqrt(1.5);
    aux << 7, 8, 9;
    t.add_column({"x", Role::Language}, x);
    t.add_column({"k", Role::Covariate}, k);
    t.add_column({"z", Role::Covariate}, already);
    t.add_column({"aux", Role::Auxiliary}, aux);
    const auto p = standardize(t, {0, 1, 2});
    CHECK(t.col("x")(0) == doctest::Approx(-1.224744871391589).epsilon(1e-12));
    CHECK(t.col("x")(1) == doctest::Approx(0.0));
    CHECK(t.col("x")(2) == doctest::Approx(1.224744871391589).epsilon(1e-12));
    CHECK((t.col("z") - already).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(p.dropped_constant == std::vector<std::string>{"k"});
    CHECK_FALSE(t.find("k").has_value());
    CHECK(t.col("aux")(0) == 7.0);
    CHECK(t.info("x").provenance == Provenance::Standardized);

    FeatureTable flat({"a", "b"});
    flat.add_column({"c", Role::Language}, Vector::Ones(2));
    CHECK(testutil::error_kind([&] { standardize(flat, {0, 1}); }) == ErrorKind::NoVaryingColumns);
}
