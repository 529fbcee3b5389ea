#include "approval/pipeline.hpp"

#include "approval/compositional.hpp"
#include "approval/csv.hpp"
#include "approval/design.hpp"
#include "approval/report.hpp"
#include "approval/synth.hpp"
#include "approval/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <sstream>

namespace approval::pipeline
{

namespace fs = std::filesystem;

const char* const demo_lexicon_text = R"(# category<TAB>patterns; a trailing * matches any suffix
posemo	love,nice,sweet,happy,great,glad,thank*
negemo	hate,awful,sad,angry,worst,annoy*
anx	worried,nervous,afraid,fear*
affect	feel*,emotion*,love,nice,sweet,happy,great,glad,thank*,hate,awful,sad,angry,worst,annoy*,worried,nervous,afraid,fear*
cause	because,hence,therefore,effect*
tentat	maybe,perhaps,guess,possibl*
insight	think,know,consider*,realiz*,understand*
cogproc	reason*,because,hence,therefore,effect*,maybe,perhaps,guess,possibl*,think,know,consider*,realiz*,understand*
we	we,us,our,ourselves
you	you,your,yours
family	mom,dad,brother,sister,family
friend	friend*,buddy,pal,mate
social	people,talk*,shar*,mom,dad,brother,sister,family,friend*,buddy,pal,mate
netspeak	lol,btw,imo,tbh,omg
money	money,cash,pay*,dollar*,price*
umbrella:affect	posemo,negemo,anx
umbrella:cogproc	cause,tentat,insight
umbrella:social	family,friend
)";

lexicon::LexiconHierarchy demo_lexicon()
{
    auto lex = lexicon::LexiconHierarchy::parse(demo_lexicon_text);
    lex.validate();
    return lex;
}

namespace
{

using Clock = std::chrono::steady_clock;

double cluster_df(const SparseDesign& design)
{
    return static_cast<double>(design.cluster_names.size()) - 1.0;
}

std::string pad2(int v)
{
    return (v < 10 ? "0" : "") + std::to_string(v);
}

std::vector<std::string> pick(const std::vector<std::string>& v, const std::vector<Index>& idx)
{
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (Index i : idx)
        out.push_back(v[static_cast<std::size_t>(i)]);
    return out;
}

std::vector<std::string> row_subreddits(const corpus::Corpus& corpus, const std::vector<Index>& rows)
{
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (Index r : rows)
        out.push_back(corpus.posts[static_cast<std::size_t>(r)].subreddit);
    return out;
}

std::vector<std::string> language_columns(const FeatureTable& features)
{
    return features.names(Role::Language);
}

/// Language columns of `features` plus the Z block, restricted to `rows`.
FeatureTable analysis_table(const corpus::Corpus& corpus, const Prepared& prepared, const FeatureTable& features,
                            const std::vector<Index>& rows, bool with_covariates)
{
    std::vector<std::string> ids;
    for (Index r : rows)
        ids.push_back(corpus.posts[static_cast<std::size_t>(r)].post_id);
    FeatureTable t(ids);
    const auto names = language_columns(features);
    if (!names.empty())
    {
        std::vector<ColumnInfo> infos;
        for (const auto& n : names)
            infos.push_back(features.info(n));
        t.add_columns(infos, features.gather(names)(rows, Eigen::all));
    }
    if (with_covariates)
    {
        std::vector<ColumnInfo> infos;
        for (const auto& n : covariate_names())
            infos.push_back({n, Role::Covariate, Provenance::Engineered, n == "trend_days" ? "" : "log1p"});
        t.add_columns(infos, prepared.z(rows, Eigen::all));
    }
    return t;
}

std::span<const bool> as_span(const std::vector<bool>& flags, std::unique_ptr<bool[]>& storage)
{
    storage = std::make_unique<bool[]>(flags.size());
    std::copy(flags.begin(), flags.end(), storage.get());
    return {storage.get(), flags.size()};
}

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
    out << content;
}

} // namespace

const std::vector<std::string>& covariate_names()
{
    static const std::vector<std::string> names(corpus::BaselineCovariates::names().begin(),
                                                corpus::BaselineCovariates::names().end());
    return names;
}

PipelineConfig PipelineConfig::from_config(const KeyValueFile& f)
{
    PipelineConfig c;
    c.source = f;
    c.input = f.get("input.path", c.input);
    c.schema = f.get("input.schema", c.schema);
    c.lexicon = f.get("input.lexicon", c.lexicon);
    c.out_dir = f.get("output.dir", c.out_dir);
    c.start_date = f.get("window.start_date", c.start_date);
    c.observation_days = static_cast<int>(f.get_int("window.observation_days", c.observation_days));
    c.baseline_days = static_cast<int>(f.get_int("window.baseline_days", c.baseline_days));
    if (f.has("estimate.outcomes"))
    {
        c.outcomes.clear();
        for (const auto& o : f.get_list("estimate.outcomes", {}))
            c.outcomes.push_back(corpus::parse_outcome(o));
    }
    c.control_ratio = static_cast<int>(f.get_int("sampling.control_ratio", c.control_ratio));
    c.smd_threshold = f.get_double("stratify.smd_threshold", c.smd_threshold);
    c.min_stratum_each = static_cast<int>(f.get_int("stratify.min_per_arm", c.min_stratum_each));
    c.adaboost.rounds = static_cast<int>(f.get_int("stratify.adaboost_rounds", c.adaboost.rounds));
    c.adaboost.depth = static_cast<int>(f.get_int("stratify.adaboost_depth", c.adaboost.depth));
    c.adaboost.learning_rate = f.get_double("stratify.adaboost_learning_rate", c.adaboost.learning_rate);
    c.logit.ridge = f.get_double("estimate.ridge", c.logit.ridge);
    c.logit.tol = f.get_double("estimate.tol", c.logit.tol);
    c.logit.max_iter = static_cast<int>(f.get_int("estimate.max_iter", c.logit.max_iter));
    c.lda_topics = static_cast<int>(f.get_int("featurize.lda_topics", c.lda_topics));
    c.lda_sweeps = static_cast<int>(f.get_int("featurize.lda_sweeps", c.lda_sweeps));
    c.lda_average_last = static_cast<int>(f.get_int("featurize.lda_average_last", c.lda_average_last));
    c.pca_components = static_cast<int>(f.get_int("featurize.pca_components", c.pca_components));
    c.exemplar_k = static_cast<int>(f.get_int("featurize.exemplar_k", c.exemplar_k));
    c.predict_outcome = corpus::parse_outcome(f.get("predict.outcome", "score"));
    c.predict.gbt.depth = static_cast<int>(f.get_int("predict.depth", c.predict.gbt.depth));
    c.predict.gbt.rounds = static_cast<int>(f.get_int("predict.rounds", c.predict.gbt.rounds));
    c.predict.gbt.learning_rate = f.get_double("predict.learning_rate", c.predict.gbt.learning_rate);
    c.predict.test_fraction = f.get_double("predict.test_fraction", c.predict.test_fraction);
    c.predict.local_min_rows = static_cast<std::size_t>(f.get_int("predict.local_min_rows", 200));
    c.predict.top_k = static_cast<int>(f.get_int("predict.top_k", c.predict.top_k));
    c.centroid_sample = static_cast<std::size_t>(f.get_int("distinct.sample", 2000));
    c.distinct_top_k = static_cast<int>(f.get_int("distinct.top_k", c.distinct_top_k));
    c.seed = static_cast<std::uint64_t>(f.get_int("run.seed", static_cast<long long>(c.seed)));
    c.jobs = static_cast<int>(f.get_int("run.jobs", c.jobs));
    c.synthetic = f.get_bool("run.synthetic", c.synthetic);
    return c;
}

std::string PipelineConfig::canonical() const
{
    std::ostringstream s;
    s << "input=" << input << "\nschema=" << schema << "\nlexicon=" << lexicon << "\nstart_date=" << start_date
      << "\nobservation_days=" << observation_days << "\nbaseline_days=" << baseline_days << "\noutcomes=";
    for (auto o : outcomes)
        s << corpus::to_string(o) << ",";
    s << "\ncontrol_ratio=" << control_ratio << "\nsmd_threshold=" << format_full(smd_threshold)
      << "\nmin_per_arm=" << min_stratum_each << "\nadaboost=" << adaboost.rounds << "," << adaboost.depth << ","
      << format_full(adaboost.learning_rate) << "\nridge=" << format_full(logit.ridge)
      << "\ntol=" << format_full(logit.tol) << "\nmax_iter=" << logit.max_iter << "\nlda=" << lda_topics << ","
      << lda_sweeps << "," << lda_average_last << "\npca_components=" << pca_components
      << "\nexemplar_k=" << exemplar_k << "\npredict_outcome=" << corpus::to_string(predict_outcome)
      << "\ngbt=" << predict.gbt.depth << "," << predict.gbt.rounds << "," << format_full(predict.gbt.learning_rate)
      << "\ntest_fraction=" << format_full(predict.test_fraction) << "\nlocal_min_rows=" << predict.local_min_rows
      << "\ntop_k=" << predict.top_k << "\ncentroid_sample=" << centroid_sample
      << "\ndistinct_top_k=" << distinct_top_k << "\nseed=" << seed << "\nsynthetic=" << synthetic << "\n";
    if (synthetic)
        s << synth::GeneratorConfig::from_config(source).canonical();
    return s.str();
}

void PipelineConfig::validate() const
{
    auto bad = [](const std::string& msg) { fail(ErrorKind::ConfigError, msg); };
    if (baseline_days < 1 || observation_days <= baseline_days)
        bad("window: the baseline must be a strict prefix of the observation window");
    if (!start_date.empty())
        (void)parse_date(start_date);
    if (outcomes.empty())
        bad("estimate.outcomes is empty");
    if (control_ratio < 1)
        bad("sampling.control_ratio must be at least 1");
    if (smd_threshold < 0.0)
        bad("stratify.smd_threshold must be nonnegative");
    if (min_stratum_each < 1)
        bad("stratify.min_per_arm must be positive");
    if (adaboost.rounds < 1 || adaboost.depth < 1)
        bad("stratify: adaboost rounds and depth must be positive");
    if (lda_topics < 2 || lda_sweeps < 1 || lda_average_last < 1 || lda_average_last > lda_sweeps)
        bad("featurize: invalid LDA settings");
    if (pca_components < 1 || exemplar_k < 1)
        bad("featurize: pca_components and exemplar_k must be positive");
    if (predict.test_fraction <= 0.0 || predict.test_fraction >= 1.0)
        bad("predict.test_fraction must lie in (0, 1)");
    if (predict.gbt.depth < 1 || predict.gbt.rounds < 0 || predict.gbt.learning_rate <= 0.0)
        bad("predict: invalid boosting settings");
    if (centroid_sample < 1 || distinct_top_k < 2)
        bad("distinct: sample must be positive and top_k at least 2");
    if (jobs < 1)
        bad("run.jobs must be positive");
    if (!synthetic && input.empty())
        bad("input.path is required unless run.synthetic = true");
}

corpus::ObservationWindow make_window(const corpus::Corpus& corpus, const PipelineConfig& config)
{
    corpus::ObservationWindow w;
    if (!config.start_date.empty())
        w.start = parse_date(config.start_date);
    else
    {
        if (corpus.posts.empty())
            fail(ErrorKind::InsufficientRows, "corpus is empty");
        std::int64_t first = std::numeric_limits<std::int64_t>::max();
        for (const auto& p : corpus.posts)
            first = std::min(first, p.created_utc);
        w.start = utc_day(first) * seconds_per_day;
    }
    w.baseline_days = config.baseline_days;
    w.end = w.start + static_cast<std::int64_t>(config.observation_days) * seconds_per_day;
    return w;
}

Prepared prepare(const corpus::Corpus& corpus, const PipelineConfig& config)
{
    Prepared p;
    p.window = make_window(corpus, config);
    p.labels = corpus::label_outcomes(corpus.posts);
    const auto baselines = corpus::baselines_by_author(corpus.posts, p.window);
    const auto origins = corpus::account_origin_by_author(corpus.posts);
    const Index n = static_cast<Index>(corpus.size());
    p.eligible.assign(corpus.size(), false);
    p.newcomer.assign(corpus.size(), false);
    p.z = Matrix::Constant(n, 6, std::numeric_limits<double>::quiet_NaN());
    for (Index i = 0; i < n; ++i)
    {
        const auto& post = corpus.posts[static_cast<std::size_t>(i)];
        if (p.window.in_baseline(post.created_utc))
            ++p.baseline_posts;
        if (!p.window.in_sampling(post.created_utc))
            continue;
        auto b = baselines.find(post.author_id);
        if (b == baselines.end())
            continue;
        const std::int64_t origin = origins.at(post.author_id);
        const auto raw = corpus::covariates_at(b->second, p.window, post.created_utc, origin, false);
        const auto logged = corpus::covariates_at(b->second, p.window, post.created_utc, origin, true);
        p.eligible[static_cast<std::size_t>(i)] = true;
        p.newcomer[static_cast<std::size_t>(i)] = corpus::is_newcomer(raw.account_age_days);
        p.z.row(i) = logged.as_vector().transpose();
    }
    return p;
}

Featurized featurize(const corpus::Corpus& corpus, const Prepared& prepared, const PipelineConfig& config,
                     const lexicon::LexiconHierarchy& lexicon)
{
    Featurized out;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (prepared.eligible[i])
            out.rows.push_back(static_cast<Index>(i));
    const Index n_all = static_cast<Index>(corpus.size());
    std::vector<std::string> ids;
    for (const auto& p : corpus.posts)
        ids.push_back(p.post_id);
    out.table = FeatureTable(ids);

    // Lexicon percentages and surface markers.
    const auto& cats = lexicon.categories();
    Matrix lex = Matrix::Constant(n_all, static_cast<Index>(cats.size()), nan);
    Vector flesch = Vector::Constant(n_all, nan), questions = Vector::Constant(n_all, nan);
    std::vector<std::vector<std::string>> docs;
    int empty_texts = 0;
    for (Index r : out.rows)
    {
        const auto& text = corpus.posts[static_cast<std::size_t>(r)].text;
        const auto tokens = text::tokenize(text);
        docs.push_back(topic_tokens(tokens));
        if (tokens.empty())
        {
            ++empty_texts;
            continue;
        }
        const auto pct = lexicon::lexicon_percentages(tokens, lexicon);
        for (std::size_t c = 0; c < pct.size(); ++c)
            lex(r, static_cast<Index>(c)) = pct[c];
        try
        {
            flesch(r) = text::flesch_reading_ease(text);
            questions(r) = text::question_ratio(text);
        }
        catch (const Error&)
        {
        }
    }
    if (empty_texts > 0)
        out.notes.push_back(std::to_string(empty_texts) + " posts without tokens left missing");
    {
        std::vector<ColumnInfo> infos;
        for (const auto& c : cats)
            infos.push_back({c, Role::Language, Provenance::Raw, "lexicon %"});
        if (!cats.empty())
            out.table.add_columns(infos, lex);
    }
    out.residuals = fit_residual_umbrellas(out.table, lexicon, out.rows);
    out.table.add_column({"flesch", Role::Language, Provenance::Raw, "readability"}, flesch);
    out.table.add_column({"question_ratio", Role::Language, Provenance::Raw, "surface"}, questions);

    // Topics: proportions mapped through CLR, last coordinate dropped.
    if (!out.rows.empty())
    {
        LdaConfig lcfg;
        lcfg.topics = config.lda_topics;
        lcfg.sweeps = config.lda_sweeps;
        lcfg.average_last = config.lda_average_last;
        lcfg.seed = config.seed;
        out.lda = fit_lda(docs, lcfg);
        const Matrix clr = clr_transform(out.lda->proportions);
        const Matrix kept = drop_coordinate(clr, clr.cols() - 1);
        Matrix block = Matrix::Constant(n_all, kept.cols(), nan);
        block(out.rows, Eigen::all) = kept;
        std::vector<ColumnInfo> infos;
        for (Index k = 0; k < kept.cols(); ++k)
            infos.push_back({"topic_" + pad2(static_cast<int>(k + 1)), Role::Language, Provenance::Engineered, "clr"});
        out.table.add_columns(infos, block);
    }

    // Semantic style: principal components of the sentence embeddings.
    if (corpus.has_embeddings())
    {
        for (Index r : out.rows)
            if (corpus.embeddings.row(r).allFinite())
                out.pc_rows.push_back(r);
        const Index k = config.pca_components;
        if (static_cast<Index>(out.pc_rows.size()) > k)
        {
            const Matrix emb = corpus.embeddings(out.pc_rows, Eigen::all);
            out.pca = fit_pca(emb, k);
            out.pc_scores = pc_scores(emb, *out.pca);
            Matrix block = Matrix::Constant(n_all, k, nan);
            block(out.pc_rows, Eigen::all) = out.pc_scores;
            std::vector<ColumnInfo> infos;
            for (Index c = 0; c < k; ++c)
                infos.push_back({"pc_" + pad2(static_cast<int>(c + 1)), Role::Language, Provenance::Engineered, "pca"});
            out.table.add_columns(infos, block);
            std::vector<std::string> pids, texts;
            for (Index r : out.pc_rows)
            {
                pids.push_back(corpus.posts[static_cast<std::size_t>(r)].post_id);
                texts.push_back(corpus.posts[static_cast<std::size_t>(r)].text);
            }
            out.exemplars = export_exemplars(out.pc_scores, pids, config.exemplar_k);
            out.exemplar_markdown = render_exemplars(out.exemplars, out.pc_scores, pids, texts);
        }
        else
            out.notes.push_back("too few embedded posts for " + std::to_string(k) + " components; PCA skipped");
    }

    for (const char* name : {"toxicity", "sentiment", "politeness"})
        if (auto it = corpus.columns.find(name); it != corpus.columns.end())
            out.table.add_column({name, Role::Language, Provenance::Raw, "input column"}, it->second);
    for (const char* name : {"prosocial_support", "prosocial_agreement", "prosocial_politeness"})
        if (auto it = corpus.columns.find(name); it != corpus.columns.end())
            out.table.add_column({name, Role::Auxiliary, Provenance::Raw, "input column"}, it->second);
    return out;
}

OutcomeAnalysis analyze_outcome(const corpus::Corpus& corpus, const Prepared& prepared, const FeatureTable& features,
                                corpus::Outcome outcome, const PipelineConfig& config)
{
    OutcomeAnalysis a;
    a.outcome = outcome;
    const std::string outcome_name(corpus::to_string(outcome));
    std::unique_ptr<bool[]> eligible;
    a.pool = corpus::build_candidate_pool(corpus.posts, prepared.labels.labels, as_span(prepared.eligible, eligible), outcome,
                                          config.control_ratio, config.seed);
    std::vector<std::pair<Index, bool>> members;
    for (auto r : a.pool.positive_rows)
        members.emplace_back(static_cast<Index>(r), true);
    for (auto r : a.pool.control_rows)
        members.emplace_back(static_cast<Index>(r), false);
    std::sort(members.begin(), members.end());
    if (members.empty())
        fail(ErrorKind::PipelineHalt, outcome_name + ": empty candidate pool");
    std::vector<bool> label;
    for (const auto& [r, y] : members)
    {
        a.pool_rows.push_back(r);
        label.push_back(y);
    }
    const FeatureTable pool_table = analysis_table(corpus, prepared, features, a.pool_rows, true);
    const auto& covs = covariate_names();
    const Matrix z = pool_table.gather(covs);

    // Risk model and deciles per subreddit.
    std::map<std::string, std::vector<Index>> by_sub;
    for (std::size_t k = 0; k < a.pool_rows.size(); ++k)
        by_sub[corpus.posts[static_cast<std::size_t>(a.pool_rows[k])].subreddit].push_back(static_cast<Index>(k));
    std::vector<Index> ranked;
    std::vector<int> decile;
    for (const auto& [sub, idx] : by_sub)
    {
        std::vector<bool> y;
        for (Index k : idx)
            y.push_back(label[static_cast<std::size_t>(k)]);
        try
        {
            AdaBoostConfig acfg = config.adaboost;
            acfg.seed = hash_combine(config.seed, fnv1a(sub));
            const auto model = fit_risk_model(pool_table, covs, idx, y, sub, outcome_name, acfg);
            const Vector score = model.ensemble.predict_proba(z(idx, Eigen::all));
            std::vector<double> s(score.data(), score.data() + score.size());
            const auto d = assign_deciles(s, pick(pool_table.row_ids(), idx));
            for (std::size_t k = 0; k < idx.size(); ++k)
            {
                ranked.push_back(idx[k]);
                decile.push_back(d.decile[k]);
            }
        }
        catch (const Error& e)
        {
            if (e.kind() != ErrorKind::SubredditSkipped)
                throw;
            a.skipped_subreddits.push_back(sub);
        }
    }
    if (ranked.empty())
        fail(ErrorKind::PipelineHalt, outcome_name + ": no subreddit could be stratified");

    std::vector<std::string> ranked_sub;
    std::vector<bool> ranked_label;
    for (Index k : ranked)
    {
        ranked_sub.push_back(corpus.posts[static_cast<std::size_t>(a.pool_rows[static_cast<std::size_t>(k)])].subreddit);
        ranked_label.push_back(label[static_cast<std::size_t>(k)]);
    }
    const Matrix z_ranked = z(ranked, Eigen::all);
    a.strata = gate_strata(diagnose_strata(z_ranked, ranked_sub, decile, ranked_label), config.smd_threshold,
                           config.min_stratum_each);
    a.balance = summarize_balance(z_ranked, ranked_label, a.strata, covs);

    std::set<std::pair<std::string, int>> keep;
    for (const auto& s : a.strata)
        if (s.retained)
            keep.insert({s.subreddit, s.decile});
    std::vector<Index> local;
    std::vector<std::string> stratum;
    for (std::size_t k = 0; k < ranked.size(); ++k)
        if (keep.count({ranked_sub[k], decile[k]}))
        {
            local.push_back(ranked[k]);
            stratum.push_back(ranked_sub[k] + "|" + std::to_string(decile[k]));
        }
    // Keep corpus order inside the analysis set.
    std::vector<std::size_t> order(local.size());
    for (std::size_t k = 0; k < order.size(); ++k)
        order[k] = k;
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return local[x] < local[y]; });
    std::vector<Index> sorted_local;
    std::vector<std::string> sorted_stratum;
    for (auto k : order)
    {
        sorted_local.push_back(local[k]);
        sorted_stratum.push_back(stratum[k]);
    }

    FeatureTable t = pool_table.select_rows(sorted_local);
    std::vector<Index> all(static_cast<std::size_t>(t.rows()));
    for (std::size_t k = 0; k < all.size(); ++k)
        all[k] = static_cast<Index>(k);
    a.standardization = standardize(t, all);

    DesignInputs in;
    in.table = &t;
    in.stratum = sorted_stratum;
    for (Index k : sorted_local)
    {
        const Index r = a.pool_rows[static_cast<std::size_t>(k)];
        a.analysis_rows.push_back(r);
        const auto& post = corpus.posts[static_cast<std::size_t>(r)];
        in.response.push_back(label[static_cast<std::size_t>(k)]);
        in.newcomer.push_back(prepared.newcomer[static_cast<std::size_t>(r)]);
        in.day.push_back(format_date(post.created_utc));
        in.hour.push_back(std::to_string(utc_hour(post.created_utc)));
        in.cluster.push_back(post.subreddit);
    }
    ModelSpec spec;
    spec.outcome = outcome_name;
    spec.language_terms = t.names(Role::Language);
    spec.covariate_terms = t.names(Role::Covariate);
    const SparseDesign design = build_design(in, spec);
    a.fit = fit_logit(design, config.logit);
    a.fit.robust_cov = cluster_robust_cov(design, a.fit);
    a.report = effect_tables(a.fit, a.fit.robust_cov, outcome_name, cluster_df(design));
    for (const auto& d : a.standardization.dropped_constant)
        a.report.dropped.push_back(d + ": constant before standardization");
    a.newcomer = newcomer_composition(a.report);
    return a;
}

EffectReport naive_effects(const corpus::Corpus& corpus, const Prepared& prepared, const FeatureTable& features,
                           corpus::Outcome outcome, const PipelineConfig& config)
{
    std::unique_ptr<bool[]> eligible;
    const auto pool = corpus::build_candidate_pool(corpus.posts, prepared.labels.labels, as_span(prepared.eligible, eligible), outcome,
                                                   config.control_ratio, config.seed);
    std::vector<std::pair<Index, bool>> members;
    for (auto r : pool.positive_rows)
        members.emplace_back(static_cast<Index>(r), true);
    for (auto r : pool.control_rows)
        members.emplace_back(static_cast<Index>(r), false);
    std::sort(members.begin(), members.end());
    std::vector<Index> rows;
    DesignInputs in;
    for (const auto& [r, y] : members)
    {
        rows.push_back(r);
        in.response.push_back(y);
        in.newcomer.push_back(prepared.newcomer[static_cast<std::size_t>(r)]);
        in.cluster.push_back(corpus.posts[static_cast<std::size_t>(r)].subreddit);
    }
    FeatureTable t = analysis_table(corpus, prepared, features, rows, false);
    std::vector<Index> all(rows.size());
    for (std::size_t k = 0; k < all.size(); ++k)
        all[k] = static_cast<Index>(k);
    standardize(t, all);
    in.table = &t;
    ModelSpec spec;
    spec.outcome = std::string(corpus::to_string(outcome));
    spec.language_terms = t.names(Role::Language);
    spec.interactions = false;
    spec.newcomer_main = false;
    spec.fixed_effects = false;
    const SparseDesign design = build_design(in, spec);
    FitResult fit = fit_logit(design, config.logit);
    fit.robust_cov = cluster_robust_cov(design, fit);
    return effect_tables(fit, fit.robust_cov, spec.outcome, cluster_df(design));
}

Prediction predict(const corpus::Corpus& corpus, const Prepared& prepared, const FeatureTable& features,
                   const PipelineConfig& config)
{
    Prediction p;
    p.outcome = config.predict_outcome;
    std::vector<bool> labels;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (prepared.eligible[i] && prepared.labels.labels[i])
        {
            p.rows.push_back(static_cast<Index>(i));
            labels.push_back(prepared.labels.labels[i]->satisfies(p.outcome));
        }
    if (p.rows.empty())
        fail(ErrorKind::PipelineHalt, "predict: no labeled rows");
    FeatureTable t = analysis_table(corpus, prepared, features, p.rows, false);
    std::vector<Index> all(p.rows.size());
    for (std::size_t k = 0; k < all.size(); ++k)
        all[k] = static_cast<Index>(k);
    standardize(t, all);
    p.features = t.names(Role::Language);
    const Matrix x = t.gather(p.features);
    PredictConfig pcfg = config.predict;
    pcfg.seed = config.seed;
    p.comparison = run_global_local(x, labels, row_subreddits(corpus, p.rows), p.features, pcfg);

    const char* pro[] = {"prosocial_support", "prosocial_agreement", "prosocial_politeness"};
    if (features.find(pro[0]) && features.find(pro[1]) && features.find(pro[2]))
    {
        try
        {
            const Vector s = features.col(pro[0])(p.rows), g = features.col(pro[1])(p.rows),
                         l = features.col(pro[2])(p.rows);
            p.baseline = prosociality_baseline(s, g, l, labels, p.comparison.split);
            p.baseline_status = "ok";
        }
        catch (const Error& e)
        {
            if (e.kind() != ErrorKind::BaselineSkipped)
                throw;
            p.baseline_status = e.what();
        }
    }
    else
        p.baseline_status = "prosociality columns missing";
    return p;
}

Distinctiveness distinct(const corpus::Corpus& corpus, const Prepared& prepared, const Prediction& prediction,
                         const PipelineConfig& config)
{
    Distinctiveness d;
    if (!corpus.has_embeddings())
    {
        d.status = "no embeddings";
        return d;
    }
    std::vector<Index> rows;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (prepared.eligible[i] && corpus.embeddings.row(static_cast<Index>(i)).allFinite())
            rows.push_back(static_cast<Index>(i));
    d.centroids = compute_centroids(corpus.embeddings(rows, Eigen::all), row_subreddits(corpus, rows),
                                    config.centroid_sample, config.seed);
    const auto take = [&](const std::vector<std::string>& v) {
        return std::vector<std::string>(v.begin(), v.begin() + std::min<std::ptrdiff_t>(config.distinct_top_k,
                                                                                        static_cast<std::ptrdiff_t>(v.size())));
    };
    d.gains = take(prediction.comparison.top_gains);
    d.losses = take(prediction.comparison.top_losses);
    std::vector<double> g, l;
    for (const auto& c : d.centroids.communities)
    {
        if (std::find(d.gains.begin(), d.gains.end(), c.subreddit) != d.gains.end())
            g.push_back(c.distance);
        if (std::find(d.losses.begin(), d.losses.end(), c.subreddit) != d.losses.end())
            l.push_back(c.distance);
    }
    try
    {
        d.welch = welch_t(g, l);
        d.status = "ok";
    }
    catch (const Error& e)
    {
        if (e.kind() != ErrorKind::InsufficientGroup)
            throw;
        d.status = e.what();
    }
    return d;
}

std::string RunManifest::to_json(bool with_timings) const
{
    nlohmann::ordered_json j;
    j["config_hash"] = config_hash;
    j["version"] = version;
    j["complete"] = complete;
    if (!failure.empty())
        j["failure"] = failure;
    j["stages"] = nlohmann::ordered_json::array();
    for (const auto& s : stages)
    {
        nlohmann::ordered_json sj;
        sj["stage"] = s.stage;
        sj["rows"] = s.rows;
        if (with_timings)
            sj["seconds"] = s.seconds;
        sj["status"] = s.status;
        j["stages"].push_back(sj);
    }
    j["artifacts"] = artifacts;
    return j.dump(2) + "\n";
}

corpus::Corpus load_input(const PipelineConfig& config)
{
    const auto manifest = config.schema.empty() ? schema::Manifest::canonical() : schema::Manifest::load(config.schema);
    return corpus::load_corpus(csv::read_file(config.input), manifest);
}

// CSV writers already lead with "# manifest=..."; other formats get the hash here.
std::string tag_artifact(const std::string& name, const std::string& content, const std::string& hash)
{
    if (name.ends_with(".json"))
    {
        auto j = nlohmann::ordered_json::parse(content);
        j["manifest"] = hash;
        return j.dump(2) + "\n";
    }
    if (name.ends_with(".md"))
        return "<!-- manifest=" + hash + " -->\n" + content;
    return content;
}

RunManifest run_all(const PipelineConfig& config)
{
    config.validate();
    RunManifest m;
    m.config_hash = hex64(config.hash());
    const fs::path dir(config.out_dir);
    fs::create_directories(dir);
    const fs::path marker = dir / "INCOMPLETE";
    write_file(marker, "run " + m.config_hash + " has not finished\n");
    auto emit = [&](const std::string& name, const std::string& content) {
        write_file(dir / name, tag_artifact(name, content, m.config_hash));
        m.artifacts.push_back(name);
    };
    auto stage = [&](const std::string& name, auto&& body) {
        const auto t0 = Clock::now();
        StageRecord rec;
        rec.stage = name;
        try
        {
            rec.rows = body();
        }
        catch (const Error& e)
        {
            rec.status = std::string(to_string(e.kind()));
            rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
            m.stages.push_back(rec);
            m.failure = name + ": " + e.what();
            write_file(dir / "manifest.json", m.to_json());
            throw Error(e.kind(), "[" + name + "] " + e.what());
        }
        rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        m.stages.push_back(rec);
    };

    corpus::Corpus corpus;
    stage("ingest", [&] {
        if (config.synthetic)
        {
            const auto gcfg = synth::GeneratorConfig::from_config(config.source);
            auto generated = synth::generate_corpus(gcfg);
            corpus = std::move(generated.corpus);
            std::ostringstream csv_text;
            csv::Writer w(csv_text);
            w.comment("manifest=" + m.config_hash);
            const auto table = corpus::to_table(corpus);
            w.row(table.header);
            for (const auto& row : table.rows)
                w.row(row);
            emit("synthetic_corpus.csv", csv_text.str());
            emit("ground_truth.json", generated.truth.to_json());
        }
        else
            corpus = load_input(config);
        return corpus.size();
    });

    Prepared prepared;
    Featurized feats;
    stage("featurize", [&] {
        prepared = prepare(corpus, config);
        const auto lex = config.lexicon.empty() ? demo_lexicon() : lexicon::LexiconHierarchy::load(config.lexicon);
        feats = featurize(corpus, prepared, config, lex);
        emit("exemplars.md", feats.exemplar_markdown.empty() ? "# Exemplars\n\nno embeddings available\n"
                                                             : feats.exemplar_markdown);
        return feats.rows.size();
    });

    std::vector<OutcomeAnalysis> analyses;
    stage("stratify+estimate", [&] {
        std::size_t rows = 0;
        for (auto outcome : config.outcomes)
        {
            analyses.push_back(analyze_outcome(corpus, prepared, feats.table, outcome, config));
            const auto& a = analyses.back();
            const std::string name(corpus::to_string(outcome));
            emit("balance_" + name + ".csv", report::balance_csv(a.strata, covariate_names(), m.config_hash));
            emit("balance_summary_" + name + ".csv", report::balance_summary_csv(a.balance, m.config_hash));
            rows += a.analysis_rows.size();
        }
        std::vector<EffectReport> reports;
        for (const auto& a : analyses)
            reports.push_back(a.report);
        auto tables = report::render_tables(reports, m.config_hash);
        std::string newcomer_csv;
        for (const auto& a : analyses)
        {
            auto nc = report::render_newcomer(a.report.outcome, a.newcomer, m.config_hash);
            tables.markdown += "\n" + nc.markdown;
            if (newcomer_csv.empty())
                newcomer_csv = nc.csv;
            else
                newcomer_csv += nc.csv.substr(nc.csv.find('\n', nc.csv.find('\n') + 1) + 1);
        }
        emit("effects.csv", tables.csv);
        emit("newcomer.csv", newcomer_csv);
        emit("effects.md", tables.markdown);
        return rows;
    });

    Prediction prediction;
    stage("predict", [&] {
        prediction = predict(corpus, prepared, feats.table, config);
        emit("auc_comparison.csv", report::auc_csv(prediction.comparison, prediction.baseline, m.config_hash));
        emit("auc_deltas.csv", report::auc_delta_csv(prediction.comparison, m.config_hash));
        emit("auc_summary.md", report::auc_markdown(prediction.comparison, prediction.baseline));
        emit("gbt_global.json", prediction.comparison.global_model.to_json());
        return prediction.rows.size();
    });

    stage("distinct", [&] {
        const auto d = distinct(corpus, prepared, prediction, config);
        emit("distinctiveness.csv", report::distinct_csv(d.centroids, d.gains, d.losses, m.config_hash));
        emit("welch.csv", report::welch_csv(d.welch, d.status, m.config_hash));
        return d.centroids.communities.size();
    });

    m.complete = true;
    m.artifacts.push_back("manifest.json");
    write_file(dir / "manifest.json", m.to_json());
    fs::remove(marker);
    return m;
}

} // namespace approval::pipeline
