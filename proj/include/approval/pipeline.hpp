#ifndef APPROVAL_PIPELINE_HPP
#define APPROVAL_PIPELINE_HPP

#include "approval/adaboost.hpp"
#include "approval/config.hpp"
#include "approval/corpus.hpp"
#include "approval/distinct.hpp"
#include "approval/evaluation.hpp"
#include "approval/exemplars.hpp"
#include "approval/feature_table.hpp"
#include "approval/inference.hpp"
#include "approval/lda.hpp"
#include "approval/lexicon.hpp"
#include "approval/logit.hpp"
#include "approval/pca.hpp"
#include "approval/residual.hpp"
#include "approval/stratify.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace approval::pipeline
{

struct PipelineConfig
{
    std::string input;        // canonical CSV
    std::string schema;       // manifest JSON; empty means the built-in one
    std::string lexicon;      // lexicon TSV; empty means the bundled demo lexicon
    std::string out_dir = "out";
    std::string start_date;   // empty: the UTC day of the earliest post
    int observation_days = 44;
    int baseline_days = 14;
    std::vector<corpus::Outcome> outcomes{corpus::Outcome::Score, corpus::Outcome::Award, corpus::Outcome::Gold};
    int control_ratio = 3;
    double smd_threshold = 0.30;
    int min_stratum_each = 10;
    AdaBoostConfig adaboost;
    LogitOptions logit;
    int lda_topics = 10;
    int lda_sweeps = 1000;
    int lda_average_last = 100;
    int pca_components = 10;
    int exemplar_k = 30;
    corpus::Outcome predict_outcome = corpus::Outcome::Score;
    PredictConfig predict;
    std::size_t centroid_sample = 2000;
    int distinct_top_k = 10;
    std::uint64_t seed = 2024;
    int jobs = 1;
    bool synthetic = false; // run-all generates the corpus from the [synth] section
    KeyValueFile source;

    static PipelineConfig from_config(const KeyValueFile& file);
    /// Canonical text of the effective settings; its FNV-1a hash tags every artifact.
    std::string canonical() const;
    std::uint64_t hash() const { return fnv1a(canonical()); }
    void validate() const;
};

/// Window, labels, eligibility and baseline covariates shared by every stage.
struct Prepared
{
    corpus::ObservationWindow window;
    corpus::LabelingResult labels;
    std::vector<bool> eligible;   // sampling-window post whose author has a baseline
    Matrix z;                     // n x 6 log-scaled Z; NaN where not eligible
    std::vector<bool> newcomer;   // from the raw account age
    std::size_t baseline_posts = 0;
};

corpus::ObservationWindow make_window(const corpus::Corpus& corpus, const PipelineConfig& config);
Prepared prepare(const corpus::Corpus& corpus, const PipelineConfig& config);

/// Names of the six Z columns as they appear in analysis tables.
const std::vector<std::string>& covariate_names();

struct Featurized
{
    FeatureTable table; // aligned with corpus rows; NaN outside the featurized rows
    std::vector<Index> rows;
    std::vector<ResidualFit> residuals;
    std::optional<LdaResult> lda;
    std::optional<PcaModel<double>> pca;
    Matrix pc_scores;               // rows x components, for rows with embeddings
    std::vector<Index> pc_rows;
    ExemplarSet exemplars;
    std::string exemplar_markdown;
    std::vector<std::string> notes;
};

Featurized featurize(const corpus::Corpus& corpus, const Prepared& prepared, const PipelineConfig& config,
                     const lexicon::LexiconHierarchy& lexicon);

/// The lexicon bundled with the tool (also shipped as data/demo_lexicon.tsv).
lexicon::LexiconHierarchy demo_lexicon();
extern const char* const demo_lexicon_text;

struct OutcomeAnalysis
{
    corpus::Outcome outcome = corpus::Outcome::Score;
    corpus::CandidatePool pool;
    std::vector<Index> pool_rows;       // corpus rows, ascending
    std::vector<std::string> skipped_subreddits;
    std::vector<StratumDiagnostics> strata;
    BalanceSummary balance;
    std::vector<Index> analysis_rows;   // retained corpus rows
    StandardizationParams standardization;
    FitResult fit;
    EffectReport report;
    NewcomerTable newcomer;
};

/// Candidate pool, risk stratification, gating and the fixed-effects fit for one outcome.
/// `features` holds the language columns and is aligned with corpus rows.
OutcomeAnalysis analyze_outcome(const corpus::Corpus& corpus, const Prepared& prepared, const FeatureTable& features,
                                corpus::Outcome outcome, const PipelineConfig& config);

/// Outcome ~ A on the candidate pool: no Z, no fixed effects, no stratification.
EffectReport naive_effects(const corpus::Corpus& corpus, const Prepared& prepared, const FeatureTable& features,
                           corpus::Outcome outcome, const PipelineConfig& config);

struct Prediction
{
    corpus::Outcome outcome = corpus::Outcome::Score;
    std::vector<Index> rows;
    std::vector<std::string> features;
    AucComparison comparison;
    std::optional<BaselineResult> baseline;
    std::string baseline_status;
};

Prediction predict(const corpus::Corpus& corpus, const Prepared& prepared, const FeatureTable& features,
                   const PipelineConfig& config);

struct Distinctiveness
{
    CentroidReport centroids;
    std::vector<std::string> gains;
    std::vector<std::string> losses;
    std::optional<WelchResult> welch;
    std::string status;
};

Distinctiveness distinct(const corpus::Corpus& corpus, const Prepared& prepared, const Prediction& prediction,
                         const PipelineConfig& config);

struct StageRecord
{
    std::string stage;
    std::size_t rows = 0;
    double seconds = 0.0;
    std::string status = "ok";
};

struct RunManifest
{
    std::string config_hash;
    std::string version = "1.0.0";
    std::vector<StageRecord> stages;
    std::vector<std::string> artifacts;
    bool complete = false;
    std::string failure;

    /// Timings are kept out of the JSON when `with_timings` is false.
    std::string to_json(bool with_timings = true) const;
};

/// Adds the manifest hash to JSON ("manifest" key) and markdown (leading comment) artifacts.
std::string tag_artifact(const std::string& name, const std::string& content, const std::string& hash);

/// Loads, validates and parses the configured input.
corpus::Corpus load_input(const PipelineConfig& config);

/// Runs every stage, writing artifacts under config.out_dir. Throws on stage failure after
/// writing an INCOMPLETE marker and the partial manifest.
RunManifest run_all(const PipelineConfig& config);

} // namespace approval::pipeline

#endif // APPROVAL_PIPELINE_HPP
