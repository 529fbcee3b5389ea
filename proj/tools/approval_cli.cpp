#include "approval/adapter.hpp"
#include "approval/csv.hpp"
#include "approval/pipeline.hpp"
#include "approval/report.hpp"
#include "approval/synth.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace approval;
namespace fs = std::filesystem;

namespace
{

enum Exit
{
    ExitOk = 0,
    ExitUsage = 1,
    ExitValidation = 2,
    ExitHalt = 3,
    ExitInternal = 4,
};

int exit_code(ErrorKind kind)
{
    switch (kind)
    {
    case ErrorKind::ValidationError:
    case ErrorKind::SchemaError:
    case ErrorKind::ConfigError:
    case ErrorKind::IoError:
        return ExitValidation;
    case ErrorKind::PipelineHalt:
        return ExitHalt;
    default:
        return ExitInternal;
    }
}

struct Options
{
    std::string config;
    std::string input;
    std::string out_dir;
    std::string outcome;
    std::string effects;
    long long seed = -1;
    int jobs = 0;
};

pipeline::PipelineConfig load_config(const Options& o)
{
    std::string path = o.config;
    if (path.empty())
        if (const char* env = std::getenv("APPROVAL_CONFIG"))
            path = env;
    KeyValueFile file = path.empty() ? KeyValueFile{} : KeyValueFile::load(path);
    if (!o.input.empty())
        file.set("input.path", o.input);
    if (!o.out_dir.empty())
        file.set("output.dir", o.out_dir);
    if (o.seed >= 0)
    {
        file.set("run.seed", std::to_string(o.seed));
        file.set("synth.seed", std::to_string(o.seed));
    }
    if (o.jobs > 0)
        file.set("run.jobs", std::to_string(o.jobs));
    if (!o.outcome.empty())
    {
        file.set("estimate.outcomes", o.outcome);
        file.set("predict.outcome", o.outcome);
    }
    auto cfg = pipeline::PipelineConfig::from_config(file);
    cfg.validate();
    return cfg;
}

void write(const fs::path& path, const std::string& text, const std::string& hash = {})
{
    const std::string content = hash.empty() ? text : pipeline::tag_artifact(path.filename().string(), text, hash);
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
    out << content;
    std::cout << "wrote " << path.string() << "\n";
}

corpus::Corpus load(const pipeline::PipelineConfig& cfg)
{
    if (cfg.synthetic)
        return synth::generate_corpus(synth::GeneratorConfig::from_config(cfg.source)).corpus;
    return pipeline::load_input(cfg);
}

lexicon::LexiconHierarchy load_lexicon(const pipeline::PipelineConfig& cfg)
{
    return cfg.lexicon.empty() ? pipeline::demo_lexicon() : lexicon::LexiconHierarchy::load(cfg.lexicon);
}

std::string hash_of(const pipeline::PipelineConfig& cfg)
{
    return hex64(cfg.hash());
}

int cmd_ingest(const Options& o)
{
    const auto cfg = load_config(o);
    if (cfg.input.empty())
        fail(ErrorKind::ConfigError, "ingest needs --input or input.path");
    const auto manifest = cfg.schema.empty() ? schema::Manifest::canonical() : schema::Manifest::load(cfg.schema);
    const auto table = csv::read_file(cfg.input);
    const std::string sidecar = cfg.input + ".manifest.json";
    const auto report = fs::exists(sidecar)
                            ? adapter::check_adapter_output(table, adapter::AdapterManifest::load(sidecar), manifest)
                            : schema::validate(table, manifest);
    write(fs::path(cfg.out_dir) / "validation.json", report.to_json(), hash_of(cfg));
    if (!report.ok())
    {
        std::cerr << report.issues.size() << " schema issue(s); see validation.json\n";
        return ExitValidation;
    }
    std::cout << report.rows << " rows validated\n";
    return ExitOk;
}

int cmd_featurize(const Options& o)
{
    const auto cfg = load_config(o);
    const auto corpus = load(cfg);
    const auto prepared = pipeline::prepare(corpus, cfg);
    const auto feats = pipeline::featurize(corpus, prepared, cfg, load_lexicon(cfg));
    std::ostringstream out;
    csv::Writer w(out);
    w.comment("manifest=" + hash_of(cfg));
    std::vector<std::string> header{"post_id"};
    for (const auto& c : feats.table.columns())
        header.push_back(c.name);
    w.row(header);
    for (Index r : feats.rows)
    {
        std::vector<std::string> row{feats.table.row_ids()[static_cast<std::size_t>(r)]};
        for (Index c = 0; c < feats.table.cols(); ++c)
        {
            const double v = feats.table.values()(r, c);
            row.push_back(std::isnan(v) ? std::string() : format_full(v));
        }
        w.row(row);
    }
    write(fs::path(cfg.out_dir) / "features.csv", out.str());
    write(fs::path(cfg.out_dir) / "exemplars.md", feats.exemplar_markdown, hash_of(cfg));
    for (const auto& note : feats.notes)
        std::cerr << "note: " << note << "\n";
    return ExitOk;
}

int cmd_estimate(const Options& o, bool stratify_only)
{
    const auto cfg = load_config(o);
    const auto corpus = load(cfg);
    const auto prepared = pipeline::prepare(corpus, cfg);
    const auto feats = pipeline::featurize(corpus, prepared, cfg, load_lexicon(cfg));
    const auto hash = hash_of(cfg);
    std::vector<EffectReport> reports;
    std::string newcomer_md;
    for (auto outcome : cfg.outcomes)
    {
        const auto a = pipeline::analyze_outcome(corpus, prepared, feats.table, outcome, cfg);
        const std::string name(corpus::to_string(outcome));
        write(fs::path(cfg.out_dir) / ("balance_" + name + ".csv"),
              report::balance_csv(a.strata, pipeline::covariate_names(), hash));
        write(fs::path(cfg.out_dir) / ("balance_summary_" + name + ".csv"), report::balance_summary_csv(a.balance, hash));
        reports.push_back(a.report);
        newcomer_md += report::render_newcomer(name, a.newcomer, hash).markdown;
    }
    if (stratify_only)
        return ExitOk;
    const auto tables = report::render_tables(reports, hash);
    write(fs::path(cfg.out_dir) / "effects.csv", tables.csv);
    write(fs::path(cfg.out_dir) / "effects.md", tables.markdown + "\n" + newcomer_md, hash);
    return ExitOk;
}

int cmd_predict(const Options& o, bool with_distinct)
{
    const auto cfg = load_config(o);
    const auto corpus = load(cfg);
    const auto prepared = pipeline::prepare(corpus, cfg);
    const auto feats = pipeline::featurize(corpus, prepared, cfg, load_lexicon(cfg));
    const auto hash = hash_of(cfg);
    const auto p = pipeline::predict(corpus, prepared, feats.table, cfg);
    const fs::path dir(cfg.out_dir);
    write(dir / "auc_comparison.csv", report::auc_csv(p.comparison, p.baseline, hash));
    write(dir / "auc_deltas.csv", report::auc_delta_csv(p.comparison, hash));
    write(dir / "auc_summary.md", report::auc_markdown(p.comparison, p.baseline), hash);
    write(dir / "gbt_global.json", p.comparison.global_model.to_json(), hash);
    if (with_distinct)
    {
        const auto d = pipeline::distinct(corpus, prepared, p, cfg);
        write(dir / "distinctiveness.csv", report::distinct_csv(d.centroids, d.gains, d.losses, hash));
        write(dir / "welch.csv", report::welch_csv(d.welch, d.status, hash));
    }
    return ExitOk;
}

int cmd_synth(const Options& o)
{
    std::string path = o.config;
    if (path.empty())
        if (const char* env = std::getenv("APPROVAL_CONFIG"))
            path = env;
    KeyValueFile file = path.empty() ? KeyValueFile{} : KeyValueFile::load(path);
    if (o.seed >= 0)
        file.set("synth.seed", std::to_string(o.seed));
    const auto gcfg = synth::GeneratorConfig::from_config(file);
    const auto g = synth::generate_corpus(gcfg);
    const auto table = corpus::to_table(g.corpus);
    std::ostringstream out;
    csv::Writer w(out);
    const std::string hash = hex64(gcfg.recipe_hash());
    w.comment("manifest=" + hash);
    w.row(table.header);
    for (const auto& row : table.rows)
        w.row(row);
    const fs::path dir(o.out_dir.empty() ? file.get("output.dir", "out") : o.out_dir);
    write(dir / "synthetic_corpus.csv", out.str());
    write(dir / "ground_truth.json", g.truth.to_json(), hash);
    return ExitOk;
}

int cmd_render(const Options& o)
{
    if (o.effects.empty())
        fail(ErrorKind::ConfigError, "render needs --effects <effects.csv>");
    const auto table = csv::read_file(o.effects);
    std::string hash;
    for (const auto& c : table.comments)
        if (c.rfind("manifest=", 0) == 0)
            hash = c.substr(9);
    const auto reports = report::read_effects_csv(table);
    auto md = report::render_tables(reports, hash).markdown;
    for (const auto& r : reports)
        md += "\n" + report::render_newcomer(r.outcome, newcomer_composition(r), hash).markdown;
    const fs::path dir(o.out_dir.empty() ? fs::path(o.effects).parent_path() : fs::path(o.out_dir));
    write(dir / "effects.md", md, hash);
    return ExitOk;
}

int cmd_run_all(const Options& o)
{
    const auto cfg = load_config(o);
    const auto m = pipeline::run_all(cfg);
    std::cout << "run " << m.config_hash << " complete; " << m.artifacts.size() << " artifacts in " << cfg.out_dir
              << "\n";
    return ExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Causal and predictive analysis of community feedback on posts"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Config file (default: $APPROVAL_CONFIG)");
        sub->add_option("--input", o.input, "Canonical CSV input");
        sub->add_option("--out-dir", o.out_dir, "Output directory");
        sub->add_option("--seed", o.seed, "Master seed")->check(CLI::NonNegativeNumber);
        sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--outcome", o.outcome, "score, award or gold")
            ->check(CLI::IsMember({"score", "award", "gold"}));
    };
    auto* ingest = app.add_subcommand("ingest", "Validate a canonical CSV against the schema manifest");
    auto* featurize = app.add_subcommand("featurize", "Compute the language feature table");
    auto* stratify = app.add_subcommand("stratify", "Build candidate pools, risk strata and balance reports");
    auto* estimate = app.add_subcommand("estimate", "Fit the fixed-effects model and write effect tables");
    auto* predict = app.add_subcommand("predict", "Global vs local boosted-tree AUC comparison");
    auto* distinct = app.add_subcommand("distinct", "Centroid distinctiveness and Welch test");
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
    auto* run_all = app.add_subcommand("run-all", "Run every stage and write all artifacts");
    auto* render = app.add_subcommand("render", "Re-render markdown tables from effects.csv");
    for (auto* sub : {ingest, featurize, stratify, estimate, predict, distinct, synth, run_all, render})
        common(sub);
    render->add_option("--effects", o.effects, "effects.csv to render");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? ExitOk : ExitUsage;
    }

    try
    {
        if (*ingest)
            return cmd_ingest(o);
        if (*featurize)
            return cmd_featurize(o);
        if (*stratify)
            return cmd_estimate(o, true);
        if (*estimate)
            return cmd_estimate(o, false);
        if (*predict)
            return cmd_predict(o, false);
        if (*distinct)
            return cmd_predict(o, true);
        if (*synth)
            return cmd_synth(o);
        if (*run_all)
            return cmd_run_all(o);
        if (*render)
            return cmd_render(o);
    }
    catch (const Error& e)
    {
        std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return exit_code(e.kind());
    }
    catch (const std::exception& e)
    {
        std::cerr << "internal error: " << e.what() << "\n";
        return ExitInternal;
    }
    return ExitUsage;
}
