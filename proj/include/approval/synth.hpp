#ifndef APPROVAL_SYNTH_HPP
#define APPROVAL_SYNTH_HPP

#include "approval/config.hpp"
#include "approval/corpus.hpp"
#include "approval/feature_table.hpp"
#include "approval/inference.hpp"

#include <map>
#include <string>
#include <vector>

namespace approval::synth
{

struct PlantedFeature
{
    std::string name;
    double beta = 0.0;       // per unit of the generated feature
    double theta = 0.0;      // extra effect for newcomers
    double confounding = 1.0; // multiplier on the global Z -> A strength
};

struct GeneratorConfig
{
    int n_subreddits = 20;
    int posts_per_subreddit = 2000; // sampling-window posts
    int authors_per_subreddit = 400;
    std::string start_date = "2020-05-01";
    int observation_days = 44;
    int baseline_days = 14;

    std::vector<PlantedFeature> features;
    double confounding = 0.0; // Z -> A path strength; 0 disables it
    double z_outcome = 0.0;   // Z -> outcome path strength (on the Z composite)
    std::vector<double> gamma = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}; // per log-scaled standardized Z covariate
    double newcomer_fraction = 0.3;
    double newcomer_effect = -0.06;
    double award_intercept = -1.2;
    double gold_shift = -2.0;
    double fe_subreddit_sd = 0.4;
    double fe_day_sd = 0.15;
    double fe_hour_sd = 0.15;
    double author_activity = 0.35; // mean baseline posts per day
    bool misspecified = false;     // adds 0.25 * A_0^2 to the linear predictor

    bool text = false;
    double lexicon_rate_scale = 1.0; // multiplies every category's base token rate
    bool embeddings = false;
    bool neural = false;
    double centroid_offset = 0.6;
    double embedding_noise = 0.3;

    std::uint64_t seed = 1;

    /// Canonical text of every field; hashed into the recipe hash.
    std::string canonical() const;
    std::uint64_t recipe_hash() const;
    void validate() const;

    static GeneratorConfig from_config(const KeyValueFile& file, const std::string& section = "synth");
};

struct GroundTruth
{
    std::uint64_t recipe_hash = 0;
    std::uint64_t seed = 0;
    std::map<std::string, double> beta;
    std::map<std::string, double> theta;
    double newcomer_effect = 0.0;
    std::vector<std::string> post_ids;   // sampling-window posts
    std::vector<double> award_probability; // aligned with post_ids

    std::string to_json() const;
    static GroundTruth from_json(const std::string& text);
};

struct GeneratedCorpus
{
    corpus::Corpus corpus;
    FeatureTable features; // generator features, aligned with corpus rows (zeros outside the sampling window)
    GroundTruth truth;
    corpus::ObservationWindow window;
    std::vector<Vector> centroid_offsets; // per subreddit, when embeddings are on
    Vector embedding_base;
};

GeneratedCorpus generate_corpus(const GeneratorConfig& config);

/// Names "f00", "f01", ... for quick configs.
std::vector<PlantedFeature> numbered_features(int count, double beta = 0.0);

struct RecoveryMetrics
{
    double bias = 0.0;
    double rmse = 0.0;
    double coverage = 0.0; // share of features whose 95% CI covers the truth
    int discoveries = 0;   // q < 0.05 in the main family
    int false_discoveries = 0;
    double fdp = 0.0;      // false / max(discoveries, 1)
    std::map<std::string, double> estimate;
    std::map<std::string, std::pair<double, double>> interval;
};

/// Compares main-family rows with the planted beta. `scale` maps a feature to
/// the SD used when it was standardized (estimates are divided by it); missing
/// entries mean no rescaling. A planted feature absent from the report raises SchemaError.
RecoveryMetrics evaluate_recovery(const EffectReport& report, const GroundTruth& truth,
                                  const std::map<std::string, double>& scale = {});

} // namespace approval::synth

#endif // APPROVAL_SYNTH_HPP
