#include "helpers.hpp"

#include "approval/distinct.hpp"

#include <algorithm>

using namespace approval;

TEST_CASE("community centroids")
{
    Rng rng = make_rng(6);
    const Index n = 900;
    Matrix e(n, 16);
    std::vector<std::string> sub;
    for (Index i = 0; i < n; ++i)
    {
        sub.push_back("s" + std::to_string(i % 3));
        for (Index j = 0; j < 16; ++j)
            e(i, j) = standard_normal(rng) + (j == i % 3 ? 4.0 : 0.0) + 1.0;
    }
    const auto r = compute_centroids(e, sub, 200, 5);
    REQUIRE(r.communities.size() == 3);
    for (const auto& c : r.communities)
    {
        CHECK(c.sample_size == 200);
        CHECK(c.available == 300);
        CHECK(c.distance >= 0.0);
        CHECK(c.distance <= 2.0);
        CHECK(c.distance == doctest::Approx(cosine_distance(c.centroid, r.global)).epsilon(1e-12));
    }
    const Matrix scaled = 7.5 * e;
    const auto r2 = compute_centroids(scaled, sub, 200, 5);
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(r2.communities[k].distance == doctest::Approx(r.communities[k].distance).epsilon(1e-10));
    const auto again = compute_centroids(e, sub, 200, 5);
    CHECK(again.find("s1").centroid == r.find("s1").centroid);
    CHECK(testutil::error_kind([&] { r.find("nope"); }) == ErrorKind::SchemaError);

    Eigen::Vector3d a(1, 0, 0), b(-1, 0, 0), zero(0, 0, 0);
    CHECK(cosine_distance(a, b) == doctest::Approx(2.0));
    CHECK(cosine_distance(a, a) == doctest::Approx(0.0));
    CHECK(testutil::error_kind([&] { cosine_distance(a, zero); }) == ErrorKind::DegenerateCentroid);
    const Matrix zeros = Matrix::Zero(4, 3);
    CHECK(testutil::error_kind([&] { compute_centroids(zeros, {"x", "x", "y", "y"}, 10, 1); }) ==
          ErrorKind::DegenerateCentroid);
}

TEST_CASE("Welch t-test")
{
    const std::vector<double> g{1, 2, 3}, l{2, 3, 4};
    const auto w = welch_t(g, l);
    CHECK(w.t == doctest::Approx(-1.224744871391589).epsilon(1e-12));
    CHECK(w.df == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(w.p == doctest::Approx(0.2878641347266908).epsilon(1e-10));
    CHECK(w.var_g == doctest::Approx(1.0));
    CHECK(testutil::error_kind([] { welch_t(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}); }) ==
          ErrorKind::InsufficientGroup);

    double last = 0.0;
    for (double shift : {0.5, 1.0, 2.0, 4.0})
    {
        std::vector<double> h;
        for (double v : l)
            h.push_back(v + shift);
        const double t = std::abs(welch_t(g, h).t);
        CHECK(t > last);
        last = t;
    }

    SUBCASE("special functions against reference values")
    {
        CHECK(incomplete_beta(2.5, 3.5, 0.3) == doctest::Approx(0.29675298929566646).epsilon(1e-10));
        CHECK(incomplete_beta(0.5, 0.5, 0.9) == doctest::Approx(0.7951672353008665).epsilon(1e-10));
        CHECK(incomplete_beta(10, 20, 0.25) == doctest::Approx(0.16630494959787945).epsilon(1e-10));
        CHECK(student_t_two_sided(2.0, 7.5) == doctest::Approx(0.08289699529816622).epsilon(1e-10));
        CHECK(student_t_two_sided(0.3, 1.0) == doctest::Approx(0.8144528418445154).epsilon(1e-10));
        CHECK(student_t_two_sided(5.0, 30.0) == doctest::Approx(2.3296685467007786e-05).epsilon(1e-8));
    }
    SUBCASE("null p-values are uniform")
    {
        Rng rng = make_rng(12);
        std::vector<double> ps;
        for (int rep = 0; rep < 500; ++rep)
        {
            std::vector<double> a(10), b(14);
            for (auto& v : a)
                v = standard_normal(rng);
            for (auto& v : b)
                v = 3.0 * standard_normal(rng);
            const double p = welch_t(a, b).p;
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            ps.push_back(p);
        }
        std::sort(ps.begin(), ps.end());
        double d = 0.0;
        for (std::size_t i = 0; i < ps.size(); ++i)
        {
            const double n = static_cast<double>(ps.size());
            d = std::max({d, std::abs((i + 1) / n - ps[i]), std::abs(ps[i] - i / n)});
        }
        // Kolmogorov critical value at alpha 0.01
        CHECK(d < 1.628 / std::sqrt(500.0));
    }
}
