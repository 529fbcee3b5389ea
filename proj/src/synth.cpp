#include "approval/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

namespace approval::synth
{

namespace
{

using nlohmann::json;

double sigmoid(double x)
{
    return 1.0 / (1.0 + std::exp(-x));
}

int poisson(Rng& rng, double lambda)
{
    const double limit = std::exp(-lambda);
    double prod = uniform01(rng);
    int k = 0;
    while (prod > limit)
    {
        ++k;
        prod *= uniform01(rng);
    }
    return k;
}

std::string padded(const char* prefix, long long value, int width)
{
    std::string digits = std::to_string(value);
    while (static_cast<int>(digits.size()) < width)
        digits.insert(digits.begin(), '0');
    return prefix + digits;
}

struct Category
{
    std::string name;
    std::vector<std::string> words;
    double base_rate;
};

// Words chosen so the bundled demo lexicon matches each category and nothing else.
const std::vector<Category>& text_categories()
{
    static const std::vector<Category> cats{
        {"posemo", {"love", "nice", "sweet", "happy", "great", "glad", "thanks"}, 0.04},
        {"negemo", {"hate", "awful", "sad", "angry", "worst", "annoying"}, 0.02},
        {"anx", {"worried", "nervous", "afraid", "fearful"}, 0.01},
        {"cause", {"because", "hence", "therefore", "effects"}, 0.02},
        {"tentat", {"maybe", "perhaps", "guess", "possibly"}, 0.02},
        {"insight", {"think", "know", "considering", "realized", "understand"}, 0.03},
        {"we", {"we", "us", "our", "ourselves"}, 0.02},
        {"you", {"you", "your", "yours"}, 0.03},
        {"family", {"mom", "dad", "brother", "sister", "family"}, 0.01},
        {"friend", {"friends", "buddy", "pal", "mate"}, 0.01},
        {"netspeak", {"lol", "btw", "imo", "tbh", "omg"}, 0.015},
        {"money", {"money", "cash", "paying", "dollars", "price"}, 0.01},
        {"affect", {"feeling", "emotions"}, 0.01},
        {"cogproc", {"reason", "reasons"}, 0.01},
        {"social", {"people", "talking", "sharing"}, 0.01},
    };
    return cats;
}

const std::vector<std::string>& filler_words()
{
    static const std::vector<std::string> words{"the", "a",    "is",   "it",   "this", "that", "on",  "in",
                                                "with", "for", "was",  "and",  "to",   "of",   "just", "so",
                                                "then", "here", "there", "one", "some", "all",  "when", "what"};
    return words;
}

// Topic vocabularies; each subreddit leans on one of them.
const std::vector<std::vector<std::string>>& topic_words()
{
    static const std::vector<std::vector<std::string>> topics{
        {"game", "team", "season", "player", "score", "coach", "league", "match"},
        {"code", "bug", "compiler", "server", "deploy", "library", "function", "build"},
        {"recipe", "oven", "flour", "garlic", "dinner", "sauce", "bake", "kitchen"},
        {"movie", "scene", "actor", "plot", "director", "trailer", "sequel", "cinema"},
        {"bike", "trail", "helmet", "ride", "tire", "climb", "gear", "route"},
        {"plant", "garden", "soil", "seed", "water", "leaf", "root", "pot"},
    };
    return topics;
}

std::string make_sentence(Rng& rng, int length, const std::vector<double>& rates, int topic, bool question)
{
    const auto& cats = text_categories();
    const auto& fill = filler_words();
    const auto& topics = topic_words();
    std::string out;
    for (int w = 0; w < length; ++w)
    {
        double u = uniform01(rng);
        std::string word;
        for (std::size_t c = 0; c < cats.size() && word.empty(); ++c)
        {
            if (u < rates[c])
                word = cats[c].words[rng() % cats[c].words.size()];
            u -= rates[c];
        }
        if (word.empty())
        {
            const auto& pool = uniform01(rng) < 0.35 ? topics[static_cast<std::size_t>(topic)] : fill;
            word = pool[rng() % pool.size()];
        }
        if (w == 0)
            word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
        if (!out.empty())
            out += ' ';
        out += word;
    }
    out += question ? '?' : '.';
    return out;
}

} // namespace

std::vector<PlantedFeature> numbered_features(int count, double beta)
{
    std::vector<PlantedFeature> out;
    for (int k = 0; k < count; ++k)
        out.push_back({padded("f", k, 2), beta, 0.0, 1.0});
    return out;
}

std::string GeneratorConfig::canonical() const
{
    std::string s;
    auto kv = [&](const std::string& k, const std::string& v) { s += k + "=" + v + "\n"; };
    kv("n_subreddits", std::to_string(n_subreddits));
    kv("posts_per_subreddit", std::to_string(posts_per_subreddit));
    kv("authors_per_subreddit", std::to_string(authors_per_subreddit));
    kv("start_date", start_date);
    kv("observation_days", std::to_string(observation_days));
    kv("baseline_days", std::to_string(baseline_days));
    for (const auto& f : features)
        kv("feature." + f.name, format_full(f.beta) + "," + format_full(f.theta) + "," + format_full(f.confounding));
    kv("confounding", format_full(confounding));
    kv("z_outcome", format_full(z_outcome));
    std::string g;
    for (double v : gamma)
        g += (g.empty() ? "" : ",") + format_full(v);
    kv("gamma", g);
    kv("newcomer_fraction", format_full(newcomer_fraction));
    kv("newcomer_effect", format_full(newcomer_effect));
    kv("award_intercept", format_full(award_intercept));
    kv("gold_shift", format_full(gold_shift));
    kv("fe_subreddit_sd", format_full(fe_subreddit_sd));
    kv("fe_day_sd", format_full(fe_day_sd));
    kv("fe_hour_sd", format_full(fe_hour_sd));
    kv("author_activity", format_full(author_activity));
    kv("misspecified", misspecified ? "true" : "false");
    kv("text", text ? "true" : "false");
    kv("lexicon_rate_scale", format_full(lexicon_rate_scale));
    kv("embeddings", embeddings ? "true" : "false");
    kv("neural", neural ? "true" : "false");
    kv("centroid_offset", format_full(centroid_offset));
    kv("embedding_noise", format_full(embedding_noise));
    kv("seed", std::to_string(seed));
    return s;
}

std::uint64_t GeneratorConfig::recipe_hash() const
{
    return fnv1a(canonical());
}

void GeneratorConfig::validate() const
{
    auto bad = [](const std::string& msg) { fail(ErrorKind::ConfigError, "synth: " + msg); };
    if (n_subreddits < 1 || posts_per_subreddit < 1 || authors_per_subreddit < 1)
        bad("subreddit, post and author counts must be positive");
    if (baseline_days < 1 || observation_days <= baseline_days)
        bad("observation window must extend past the baseline window");
    if (gamma.size() != 6)
        bad("gamma needs one entry per baseline covariate (6)");
    if (newcomer_fraction < 0.0 || newcomer_fraction > 1.0)
        bad("newcomer_fraction must lie in [0, 1]");
    if (author_activity <= 0.0)
        bad("author_activity must be positive");
    double total = 0.0;
    for (const auto& c : text_categories())
        total += c.base_rate * lexicon_rate_scale;
    // Per-post rates scale by up to exp(0.9) around the base rates.
    if (lexicon_rate_scale < 0.0)
        bad("lexicon_rate_scale must be nonnegative");
    if (text && total * std::exp(0.9) > 1.0)
        bad("lexicon target rates exceed 100% of tokens");
    std::vector<std::string> names;
    for (const auto& f : features)
        names.push_back(f.name);
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
        bad("duplicate feature name");
    (void)parse_date(start_date);
}

GeneratorConfig GeneratorConfig::from_config(const KeyValueFile& file, const std::string& section)
{
    GeneratorConfig c;
    const std::string p = section + ".";
    c.n_subreddits = static_cast<int>(file.get_int(p + "n_subreddits", c.n_subreddits));
    c.posts_per_subreddit = static_cast<int>(file.get_int(p + "posts_per_subreddit", c.posts_per_subreddit));
    c.authors_per_subreddit = static_cast<int>(file.get_int(p + "authors_per_subreddit", c.authors_per_subreddit));
    c.start_date = file.get(p + "start_date", c.start_date);
    c.observation_days = static_cast<int>(file.get_int(p + "observation_days", c.observation_days));
    c.baseline_days = static_cast<int>(file.get_int(p + "baseline_days", c.baseline_days));
    const int n_features = static_cast<int>(file.get_int(p + "n_features", 4));
    c.features = numbered_features(n_features);
    for (auto& f : c.features)
    {
        f.beta = file.get_double(p + "beta." + f.name, 0.0);
        f.theta = file.get_double(p + "theta." + f.name, 0.0);
    }
    c.confounding = file.get_double(p + "confounding", c.confounding);
    c.z_outcome = file.get_double(p + "z_outcome", c.z_outcome);
    if (file.has(p + "gamma"))
    {
        c.gamma.clear();
        for (const auto& g : file.get_list(p + "gamma", {}))
            c.gamma.push_back(std::stod(g));
    }
    c.newcomer_fraction = file.get_double(p + "newcomer_fraction", c.newcomer_fraction);
    c.newcomer_effect = file.get_double(p + "newcomer_effect", c.newcomer_effect);
    c.award_intercept = file.get_double(p + "award_intercept", c.award_intercept);
    c.gold_shift = file.get_double(p + "gold_shift", c.gold_shift);
    c.fe_subreddit_sd = file.get_double(p + "fe_subreddit_sd", c.fe_subreddit_sd);
    c.fe_day_sd = file.get_double(p + "fe_day_sd", c.fe_day_sd);
    c.fe_hour_sd = file.get_double(p + "fe_hour_sd", c.fe_hour_sd);
    c.author_activity = file.get_double(p + "author_activity", c.author_activity);
    c.misspecified = file.get_bool(p + "misspecified", c.misspecified);
    c.text = file.get_bool(p + "text", true);
    c.lexicon_rate_scale = file.get_double(p + "lexicon_rate_scale", c.lexicon_rate_scale);
    c.embeddings = file.get_bool(p + "embeddings", true);
    c.neural = file.get_bool(p + "neural", true);
    c.centroid_offset = file.get_double(p + "centroid_offset", c.centroid_offset);
    c.embedding_noise = file.get_double(p + "embedding_noise", c.embedding_noise);
    c.seed = static_cast<std::uint64_t>(file.get_int(p + "seed", static_cast<long long>(c.seed)));
    c.validate();
    return c;
}

std::string GroundTruth::to_json() const
{
    json j;
    j["recipe_hash"] = hex64(recipe_hash);
    j["seed"] = seed;
    j["beta"] = beta;
    j["theta"] = theta;
    j["newcomer_effect"] = newcomer_effect;
    j["post_ids"] = post_ids;
    j["award_probability"] = award_probability;
    return j.dump(1) + "\n";
}

GroundTruth GroundTruth::from_json(const std::string& text)
{
    GroundTruth t;
    try
    {
        const json j = json::parse(text);
        t.recipe_hash = std::stoull(j.at("recipe_hash").get<std::string>(), nullptr, 16);
        t.seed = j.at("seed").get<std::uint64_t>();
        t.beta = j.at("beta").get<std::map<std::string, double>>();
        t.theta = j.at("theta").get<std::map<std::string, double>>();
        t.newcomer_effect = j.at("newcomer_effect").get<double>();
        t.post_ids = j.at("post_ids").get<std::vector<std::string>>();
        t.award_probability = j.at("award_probability").get<std::vector<double>>();
    }
    catch (const json::exception& e)
    {
        fail(ErrorKind::SchemaError, std::string("ground truth: ") + e.what());
    }
    return t;
}

GeneratedCorpus generate_corpus(const GeneratorConfig& cfg)
{
    cfg.validate();
    GeneratedCorpus out;
    auto& window = out.window;
    window.start = parse_date(cfg.start_date);
    window.end = window.start + static_cast<std::int64_t>(cfg.observation_days) * seconds_per_day;
    window.baseline_days = cfg.baseline_days;
    const std::int64_t baseline_len = static_cast<std::int64_t>(cfg.baseline_days) * seconds_per_day;
    const std::int64_t sampling_len = window.end - window.baseline_end();

    struct Author
    {
        std::string id;
        int subreddit;
        double quality, activity, removal;
        std::int64_t created;
        corpus::AuthorBaseline baseline;
    };

    auto& posts = out.corpus.posts;
    std::vector<Author> authors;
    Rng author_rng = make_rng(cfg.seed, 0xa0);
    Rng post_rng = make_rng(cfg.seed, 0xb0);
    long long baseline_counter = 0;

    std::vector<std::string> sub_names;
    for (int s = 0; s < cfg.n_subreddits; ++s)
        sub_names.push_back(padded("sub", s, 2));

    for (int s = 0; s < cfg.n_subreddits; ++s)
        for (int a = 0; a < cfg.authors_per_subreddit; ++a)
        {
            Author au;
            au.id = sub_names[s] + padded("_u", a, 4);
            au.subreddit = s;
            au.quality = standard_normal(author_rng);
            au.activity = cfg.author_activity * std::exp(0.6 * standard_normal(author_rng) - 0.18);
            au.removal = sigmoid(-2.5 + 0.8 * standard_normal(author_rng));
            const bool newcomer = uniform01(author_rng) < cfg.newcomer_fraction;
            const double age_days = newcomer ? 60.0 * uniform01(author_rng) : 150.0 + 2350.0 * uniform01(author_rng);
            au.created = window.start - static_cast<std::int64_t>(age_days * seconds_per_day);

            const int n_base = 1 + poisson(post_rng, au.activity * cfg.baseline_days);
            std::vector<corpus::PostRecord> history;
            for (int k = 0; k < n_base; ++k)
            {
                corpus::PostRecord p;
                p.post_id = padded("b", baseline_counter++, 7);
                p.subreddit = sub_names[s];
                p.author_id = au.id;
                p.created_utc = window.start + static_cast<std::int64_t>(uniform01(post_rng) * baseline_len);
                p.score = std::llround(3.0 + 4.0 * au.quality + 3.0 * standard_normal(post_rng));
                p.n_awards = uniform01(post_rng) < sigmoid(-2.0 + 0.7 * au.quality) ? 1 : 0;
                p.n_gold = uniform01(post_rng) < sigmoid(-4.0 + 0.7 * au.quality) ? 1 : 0;
                p.removed = uniform01(post_rng) < au.removal;
                p.author_created_utc = au.created;
                history.push_back(p);
            }
            au.baseline = corpus::summarize_baseline(history, window);
            for (auto& p : history)
                posts.push_back(std::move(p));
            authors.push_back(std::move(au));
        }

    // Sampling-window posts: authors drawn in proportion to activity.
    const std::size_t n_base_posts = posts.size();
    const Index n_sample = static_cast<Index>(cfg.n_subreddits) * cfg.posts_per_subreddit;
    std::vector<std::size_t> author_of(static_cast<std::size_t>(n_sample));
    Matrix z(n_sample, 6);
    std::vector<bool> newcomer(static_cast<std::size_t>(n_sample));
    long long sample_counter = 0;
    for (int s = 0; s < cfg.n_subreddits; ++s)
    {
        const std::size_t first = static_cast<std::size_t>(s) * cfg.authors_per_subreddit;
        std::vector<double> cum(static_cast<std::size_t>(cfg.authors_per_subreddit));
        double acc = 0.0;
        for (std::size_t a = 0; a < cum.size(); ++a)
            cum[a] = (acc += authors[first + a].activity);
        for (int k = 0; k < cfg.posts_per_subreddit; ++k)
        {
            const double u = uniform01(post_rng) * acc;
            const std::size_t a =
                std::min<std::size_t>(cum.size() - 1, std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
            const Author& au = authors[first + a];
            const Index i = static_cast<Index>(sample_counter);
            author_of[static_cast<std::size_t>(i)] = first + a;
            corpus::PostRecord p;
            p.post_id = padded("p", sample_counter++, 7);
            p.subreddit = sub_names[s];
            p.author_id = au.id;
            p.created_utc = window.baseline_end() + static_cast<std::int64_t>(uniform01(post_rng) * sampling_len);
            p.author_created_utc = au.created;
            const auto raw = corpus::covariates_at(au.baseline, window, p.created_utc, au.created, false);
            const auto logged = corpus::covariates_at(au.baseline, window, p.created_utc, au.created, true);
            z.row(i) = logged.as_vector().transpose();
            newcomer[static_cast<std::size_t>(i)] = corpus::is_newcomer(raw.account_age_days);
            posts.push_back(std::move(p));
        }
    }

    // Standardized Z over the sampling-window posts; the composite drives both confounding paths.
    Matrix zs = z;
    for (Index j = 0; j < 6; ++j)
    {
        const double mean = z.col(j).mean();
        const double sd = std::sqrt((z.col(j).array() - mean).square().mean());
        zs.col(j) = sd > 0.0 ? Vector((z.col(j).array() - mean) / sd) : Vector::Zero(n_sample);
    }
    Vector composite = zs.leftCols(5).rowwise().sum();
    {
        const double mean = composite.mean();
        const double sd = std::sqrt((composite.array() - mean).square().mean());
        composite = (composite.array() - mean) / (sd > 0.0 ? sd : 1.0);
    }

    const Index m = static_cast<Index>(cfg.features.size());
    Matrix a(n_sample, m);
    Rng feature_rng = make_rng(cfg.seed, 0xc0);
    for (Index i = 0; i < n_sample; ++i)
        for (Index k = 0; k < m; ++k)
            a(i, k) = cfg.confounding * cfg.features[static_cast<std::size_t>(k)].confounding * composite(i) +
                      standard_normal(feature_rng);

    Rng fe_rng = make_rng(cfg.seed, 0xd0);
    std::vector<double> fe_sub(static_cast<std::size_t>(cfg.n_subreddits)),
        fe_day(static_cast<std::size_t>(cfg.observation_days)), fe_hour(24);
    for (auto& v : fe_sub)
        v = cfg.fe_subreddit_sd * standard_normal(fe_rng);
    for (auto& v : fe_day)
        v = cfg.fe_day_sd * standard_normal(fe_rng);
    for (auto& v : fe_hour)
        v = cfg.fe_hour_sd * standard_normal(fe_rng);

    Vector beta(m), theta(m), gamma(6);
    for (Index k = 0; k < m; ++k)
    {
        beta(k) = cfg.features[static_cast<std::size_t>(k)].beta;
        theta(k) = cfg.features[static_cast<std::size_t>(k)].theta;
    }
    for (Index j = 0; j < 6; ++j)
        gamma(j) = cfg.gamma[static_cast<std::size_t>(j)];

    auto& truth = out.truth;
    truth.recipe_hash = cfg.recipe_hash();
    truth.seed = cfg.seed;
    truth.newcomer_effect = cfg.newcomer_effect;
    for (const auto& f : cfg.features)
    {
        truth.beta[f.name] = f.beta;
        truth.theta[f.name] = f.theta;
    }

    Rng outcome_rng = make_rng(cfg.seed, 0xe0);
    for (Index i = 0; i < n_sample; ++i)
    {
        auto& p = posts[n_base_posts + static_cast<std::size_t>(i)];
        const Author& au = authors[author_of[static_cast<std::size_t>(i)]];
        const double is_new = newcomer[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
        double eta = cfg.award_intercept + a.row(i).dot(beta) + is_new * (cfg.newcomer_effect + a.row(i).dot(theta)) +
                     cfg.z_outcome * composite(i) + zs.row(i).dot(gamma) + fe_sub[static_cast<std::size_t>(au.subreddit)] +
                     fe_day[static_cast<std::size_t>(utc_day(p.created_utc) - utc_day(window.start))] +
                     fe_hour[static_cast<std::size_t>(utc_hour(p.created_utc))];
        if (cfg.misspecified && m > 0)
            eta += 0.25 * a(i, 0) * a(i, 0);
        const double prob = sigmoid(eta);
        truth.post_ids.push_back(p.post_id);
        truth.award_probability.push_back(prob);
        p.n_awards = uniform01(outcome_rng) < prob ? 1 + poisson(outcome_rng, 0.4) : 0;
        p.n_gold = uniform01(outcome_rng) < sigmoid(eta + cfg.gold_shift) ? 1 : 0;
        const double u = std::clamp(uniform01(outcome_rng), 1e-12, 1.0 - 1e-12);
        p.score = std::llround(10.0 * (eta + std::log(u / (1.0 - u))));
        p.removed = uniform01(outcome_rng) < 0.3 * au.removal;
    }

    const std::size_t n_posts = posts.size();
    std::vector<std::string> ids;
    ids.reserve(n_posts);
    for (const auto& p : posts)
        ids.push_back(p.post_id);
    out.features = FeatureTable(ids);
    {
        Matrix block = Matrix::Zero(static_cast<Index>(n_posts), m);
        block.bottomRows(n_sample) = a;
        std::vector<ColumnInfo> infos;
        for (const auto& f : cfg.features)
            infos.push_back({f.name, Role::Language, Provenance::Raw, "synthetic"});
        if (m > 0)
            out.features.add_columns(infos, block);
    }

    // Latent channels for text and neural outputs; generator features feed them when present.
    auto latent = [&](Index i, Index k) { return m > 0 ? a(i, k % m) : 0.0; };

    out.corpus.titles.assign(n_posts, std::string());
    out.corpus.bodies.assign(n_posts, std::string());
    if (cfg.text)
    {
        Rng text_rng = make_rng(cfg.seed, 0xf0);
        const auto& cats = text_categories();
        const int n_topics = static_cast<int>(topic_words().size());
        for (std::size_t r = 0; r < n_posts; ++r)
        {
            const bool sampled = r >= n_base_posts;
            const Index i = sampled ? static_cast<Index>(r - n_base_posts) : -1;
            std::vector<double> rates(cats.size());
            for (std::size_t c = 0; c < cats.size(); ++c)
            {
                const double l = sampled ? std::clamp(latent(i, static_cast<Index>(c)), -3.0, 3.0) : 0.0;
                rates[c] = cats[c].base_rate * cfg.lexicon_rate_scale * std::exp(0.3 * l);
            }
            const int sub = std::stoi(posts[r].subreddit.substr(3));
            const double q_prob = sigmoid(-1.5 + (sampled ? 0.6 * latent(i, 1) : 0.0));
            out.corpus.titles[r] = make_sentence(text_rng, 4 + static_cast<int>(text_rng() % 4), rates,
                                                 sub % n_topics, uniform01(text_rng) < q_prob);
            const int n_sentences = 3 + static_cast<int>(text_rng() % 4);
            std::string body;
            for (int k = 0; k < n_sentences; ++k)
            {
                if (!body.empty())
                    body += ' ';
                body += make_sentence(text_rng, 6 + static_cast<int>(text_rng() % 8), rates, sub % n_topics,
                                      uniform01(text_rng) < q_prob);
            }
            out.corpus.bodies[r] = std::move(body);
        }
    }
    for (std::size_t r = 0; r < n_posts; ++r)
        posts[r].text = corpus::analyzed_text(out.corpus.titles[r], out.corpus.bodies[r]);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (cfg.neural)
    {
        Rng neural_rng = make_rng(cfg.seed, 0x100);
        for (const auto& name : corpus::neural_columns())
            if (name != "author_created_utc")
                out.corpus.columns[name] = Vector::Constant(static_cast<Index>(n_posts), nan);
        for (Index i = 0; i < n_sample; ++i)
        {
            const Index r = static_cast<Index>(n_base_posts) + i;
            const double pro = latent(i, 2);
            out.corpus.columns["toxicity"](r) = sigmoid(-2.0 + 0.8 * latent(i, 3) + 0.3 * standard_normal(neural_rng));
            out.corpus.columns["sentiment"](r) = std::tanh(0.5 * latent(i, 0) + 0.3 * standard_normal(neural_rng));
            out.corpus.columns["politeness"](r) = 0.5 * pro + standard_normal(neural_rng);
            out.corpus.columns["prosocial_support"](r) = 0.6 * pro + 0.8 * standard_normal(neural_rng);
            out.corpus.columns["prosocial_agreement"](r) = 0.6 * pro + 0.8 * standard_normal(neural_rng);
            out.corpus.columns["prosocial_politeness"](r) = 0.6 * pro + 0.8 * standard_normal(neural_rng);
        }
    }

    if (cfg.embeddings)
    {
        const int d = corpus::embedding_dim;
        Rng emb_rng = make_rng(cfg.seed, 0x110);
        auto unit = [&]() {
            Vector v(d);
            for (Index k = 0; k < d; ++k)
                v(k) = standard_normal(emb_rng);
            return Vector(v / v.norm());
        };
        out.embedding_base = 3.0 * unit();
        Matrix directions(d, std::max<Index>(m, 1));
        for (Index k = 0; k < directions.cols(); ++k)
            directions.col(k) = unit();
        for (int s = 0; s < cfg.n_subreddits; ++s)
            out.centroid_offsets.push_back(cfg.centroid_offset * unit());
        out.corpus.embeddings = Matrix::Constant(static_cast<Index>(n_posts), d, nan);
        for (Index i = 0; i < n_sample; ++i)
        {
            const Index r = static_cast<Index>(n_base_posts) + i;
            const int sub = std::stoi(posts[static_cast<std::size_t>(r)].subreddit.substr(3));
            Vector e = out.embedding_base + out.centroid_offsets[static_cast<std::size_t>(sub)];
            if (m > 0)
                e += 0.5 * directions * a.row(i).transpose().cwiseMin(3.0).cwiseMax(-3.0);
            for (Index k = 0; k < d; ++k)
                e(k) += cfg.embedding_noise * standard_normal(emb_rng);
            out.corpus.embeddings.row(r) = e.transpose();
        }
    }
    return out;
}

RecoveryMetrics evaluate_recovery(const EffectReport& report, const GroundTruth& truth,
                                  const std::map<std::string, double>& scale)
{
    std::map<std::string, const EffectRow*> rows;
    for (const auto& row : report.main)
        rows[row.feature] = &row;
    RecoveryMetrics m;
    double sum = 0.0, sq = 0.0;
    int covered = 0;
    for (const auto& [name, beta] : truth.beta)
    {
        auto it = rows.find(name);
        if (it == rows.end())
            fail(ErrorKind::SchemaError, "planted feature '" + name + "' missing from the effect report");
        const EffectRow& row = *it->second;
        auto s = scale.find(name);
        const double div = s == scale.end() ? 1.0 : s->second;
        const double est = row.beta / div;
        const double lo = (row.beta - ci_quantile * row.se) / div;
        const double hi = (row.beta + ci_quantile * row.se) / div;
        m.estimate[name] = est;
        m.interval[name] = {lo, hi};
        sum += est - beta;
        sq += (est - beta) * (est - beta);
        covered += (lo <= beta && beta <= hi) ? 1 : 0;
        if (row.q < 0.05)
        {
            ++m.discoveries;
            if (beta == 0.0)
                ++m.false_discoveries;
        }
    }
    const double n = static_cast<double>(truth.beta.size());
    if (n > 0)
    {
        m.bias = sum / n;
        m.rmse = std::sqrt(sq / n);
        m.coverage = covered / n;
    }
    m.fdp = static_cast<double>(m.false_discoveries) / std::max(m.discoveries, 1);
    return m;
}

} // namespace approval::synth
