#include "helpers.hpp"

#include "approval/adapter.hpp"
#include "approval/config.hpp"
#include "approval/pipeline.hpp"

#include <fstream>
#include <sstream>

using namespace approval;

namespace
{

csv::Table canonical_table(bool with_embeddings)
{
    csv::Table t;
    t.header = {"post_id", "subreddit", "author_id", "created_utc", "title", "body", "score", "n_awards",
                "n_gold", "removed", "author_created_utc", "toxicity", "sentiment", "politeness",
                "prosocial_support", "prosocial_agreement", "prosocial_politeness"};
    if (with_embeddings)
        for (int i = 0; i < 384; ++i)
        {
            std::string n = std::to_string(i);
            t.header.push_back("emb_" + std::string(3 - n.size(), '0') + n);
        }
    for (int r = 0; r < 3; ++r)
    {
        std::vector<std::string> row{"p" + std::to_string(r), "sub", "u1", "1588291200", "Title", "Body text.",
                                     "-2", "1", "0", "false", "", "0.2", "-0.5", "0.1", "", "0.3", "0.4"};
        if (with_embeddings)
            for (int i = 0; i < 384; ++i)
                row.push_back("0.01");
        t.rows.push_back(row);
    }
    return t;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool has_issue(const schema::ValidationReport& r, const std::string& column)
{
    for (const auto& i : r.issues)
        if (i.column == column)
            return true;
    return false;
}

} // namespace

TEST_CASE("canonical schema")
{
    const auto m = schema::Manifest::canonical();
    CHECK(schema::Manifest::parse(m.to_json()).to_json() == m.to_json());
    CHECK(slurp(APPROVAL_SOURCE_DIR "/schema/canonical_posts.json") == m.to_json());
    CHECK(schema::validate(canonical_table(true), m).ok());
    CHECK(schema::validate(canonical_table(false), m).ok());

    SUBCASE("range violation")
    {
        auto t = canonical_table(false);
        t.rows[1][11] = "1.5";
        const auto r = schema::validate(t, m);
        REQUIRE(r.issues.size() == 1);
        CHECK(r.issues[0].column == "toxicity");
        CHECK(*r.issues[0].row == 2);
    }
    SUBCASE("partial embedding block")
    {
        auto t = canonical_table(true);
        const std::size_t col = 17 + 100;
        CHECK(t.header[col] == "emb_100");
        t.header.erase(t.header.begin() + static_cast<std::ptrdiff_t>(col));
        for (auto& row : t.rows)
            row.erase(row.begin() + static_cast<std::ptrdiff_t>(col));
        CHECK(has_issue(schema::validate(t, m), "emb_100"));
    }
    SUBCASE("types, uniqueness and required columns")
    {
        auto t = canonical_table(false);
        t.rows[0][6] = "3.5";
        t.rows[2][0] = "p1";
        t.rows[1][9] = "maybe";
        const auto r = schema::validate(t, m);
        CHECK(has_issue(r, "score"));
        CHECK(has_issue(r, "post_id"));
        CHECK(has_issue(r, "removed"));
        auto missing = canonical_table(false);
        missing.header.erase(missing.header.begin() + 1);
        for (auto& row : missing.rows)
            row.erase(row.begin() + 1);
        CHECK(has_issue(schema::validate(missing, m), "subreddit"));
        CHECK(schema::ValidationReport{}.to_json().find("\"ok\": true") != std::string::npos);
    }
    SUBCASE("invalid input does not load")
    {
        auto t = canonical_table(false);
        t.rows[0][7] = "-1";
        CHECK(testutil::error_kind([&] { corpus::load_corpus(t, m); }) == ErrorKind::ValidationError);
        const auto c = corpus::load_corpus(canonical_table(false), m);
        CHECK(c.posts[0].score == -2);
        CHECK_FALSE(c.posts[0].author_created_utc.has_value());
        CHECK(std::isnan(c.columns.at("prosocial_support")(0)));
        CHECK_FALSE(c.has_embeddings());
    }
}

TEST_CASE("adapter manifest")
{
    adapter::AdapterManifest a;
    a.rows_in = a.rows_out = 3;
    a.scorers = {{"embedding", "all-MiniLM-L6-v2", "2.2.2", 64, false}, {"toxicity", "detoxify", "0.5", 32, true}};
    a.flagged_rows = {"p2"};
    const auto back = adapter::AdapterManifest::parse(a.to_json());
    CHECK(back.to_json() == a.to_json());
    CHECK(back.scorers[1].skipped);
    const auto t = canonical_table(true);
    CHECK(adapter::check_adapter_output(t, a).ok());

    auto wrong_dim = a;
    wrong_dim.embedding_dim = 768;
    CHECK(has_issue(adapter::check_adapter_output(t, wrong_dim), "embedding_dim"));
    auto lost = a;
    lost.rows_out = 2;
    CHECK(has_issue(adapter::check_adapter_output(t, lost), "rows_out"));
    CHECK(testutil::error_kind([] { adapter::AdapterManifest::parse("{\"rows_in\": 1}"); }) == ErrorKind::SchemaError);
}

TEST_CASE("config files")
{
    const auto f = KeyValueFile::parse("top = 1\n[run]\nseed = 42 # trailing\njobs=2\n; note\n[estimate]\noutcomes = score, gold\n");
    CHECK(f.get_int("top", 0) == 1);
    CHECK(f.get_int("run.seed", 0) == 42);
    CHECK(f.get_list("estimate.outcomes", {}) == std::vector<std::string>{"score", "gold"});
    CHECK(testutil::error_kind([&] { f.get_double("estimate.outcomes", 0); }) == ErrorKind::ConfigError);
    CHECK(testutil::error_kind([] { KeyValueFile::parse("[broken\n"); }) == ErrorKind::ConfigError);
    CHECK(testutil::error_kind([] { KeyValueFile::parse("novalue\n"); }) == ErrorKind::ConfigError);

    auto p = pipeline::PipelineConfig::from_config(f);
    p.synthetic = true;
    CHECK_NOTHROW(p.validate());
    auto q = p;
    q.out_dir = "elsewhere";
    q.jobs = 8;
    CHECK(q.hash() == p.hash());
    q.seed = 43;
    CHECK(q.hash() != p.hash());
    auto bad = p;
    bad.baseline_days = 50;
    CHECK(testutil::error_kind([&] { bad.validate(); }) == ErrorKind::ConfigError);
    bad = p;
    bad.synthetic = false;
    CHECK(testutil::error_kind([&] { bad.validate(); }) == ErrorKind::ConfigError);
}

TEST_CASE("bundled lexicon file")
{
    const auto file = lexicon::LexiconHierarchy::load(APPROVAL_SOURCE_DIR "/data/demo_lexicon.tsv");
    const auto builtin = pipeline::demo_lexicon();
    CHECK(file.categories() == builtin.categories());
    CHECK(file.umbrella_children() == builtin.umbrella_children());
    CHECK_NOTHROW(file.validate());
}
