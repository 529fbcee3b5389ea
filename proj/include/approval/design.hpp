#ifndef APPROVAL_DESIGN_HPP
#define APPROVAL_DESIGN_HPP

#include "approval/common.hpp"
#include "approval/feature_table.hpp"

#include <string>
#include <vector>

namespace approval
{

enum class TermFamily
{
    Intercept,
    Main,        // beta, language feature A
    Interaction, // theta, A x NEW
    Covariate,   // gamma, Z
    Newcomer,    // NEW main effect
    FixedEffect, // mu, delta, eta
};

std::string_view to_string(TermFamily family);

struct ModelSpec
{
    std::string outcome;
    std::vector<std::string> language_terms;
    bool interactions = true; // A x NEW for every language term
    std::vector<std::string> covariate_terms;
    bool newcomer_main = true;
    bool intercept = true;
    bool fixed_effects = true; // subreddit x decile, calendar day, hour of day
};

/// One-hot family stored as a level index per row; -1 is the reference level
/// (or a pruned/absorbed level) and contributes no column.
struct FixedEffectBlock
{
    std::string family; // "stratum", "day", "hour"
    std::vector<std::string> levels;
    std::vector<int> level_of_row;
};

/// Per-row inputs aligned with the analysis rows.
struct DesignInputs
{
    const FeatureTable* table = nullptr; // standardized; rows are the analysis rows
    std::vector<bool> response;
    std::vector<bool> newcomer;
    std::vector<std::string> stratum; // "subreddit|decile"
    std::vector<std::string> day;
    std::vector<std::string> hour;
    std::vector<std::string> cluster; // subreddit
};

/// X = [dense | FE one-hot blocks]. Only the dense part is materialized.
struct SparseDesign
{
    Matrix dense;
    std::vector<std::string> dense_names;
    std::vector<TermFamily> dense_family;
    std::vector<FixedEffectBlock> fe;
    Vector y;
    Vector offset; // nonzero only on rows of absorbed levels
    std::vector<int> cluster; // index into cluster_names
    std::vector<std::string> cluster_names;

    std::vector<std::string> dropped;       // "name: reason"
    std::vector<std::string> absorbed;      // FE levels whose outcomes were all identical
    bool separation_flag = false;

    Index rows() const { return dense.rows(); }
    Index fe_columns() const;
    Index cols() const { return dense.cols() + fe_columns(); }
    std::vector<std::string> column_names() const;
    std::vector<TermFamily> column_families() const;

    /// eta = X b + offset
    Vector linear_predictor(const Vector& b) const;
    /// X' v
    Vector xt(const Vector& v) const;
    /// X' diag(w) X
    Matrix xtwx(const Vector& w) const;
    /// Rows of X multiplied by v_i, summed within clusters: G x p.
    Matrix cluster_scores(const Vector& v) const;
    Matrix to_dense() const;
};

/// Builds the design with the reference level dropped per FE family,
/// constant dense columns removed, absorbed FE levels offset, and collinear
/// columns pruned by pivoted QR (relative tolerance `collinearity_tol`).
SparseDesign build_design(const DesignInputs& inputs, const ModelSpec& spec, double collinearity_tol = 1e-10);

/// Offset applied to rows of an absorbed level (all-positive or all-negative).
constexpr double absorbed_offset = 30.0;

/// Pivoted-QR pruning on an already built design; returns pruned names.
std::vector<std::string> prune_collinear(SparseDesign& design, double rel_tol = 1e-10);

} // namespace approval

#endif // APPROVAL_DESIGN_HPP
