#ifndef APPROVAL_INFERENCE_HPP
#define APPROVAL_INFERENCE_HPP

#include "approval/logit.hpp"

#include <span>
#include <string>
#include <vector>

namespace approval
{

/// Benjamini-Hochberg step-up q-values: q_(j) = min_{k >= j} p_(k) m / k, capped at 1.
/// Output is aligned with the input order. p outside [0,1] raises InvalidPValue.
std::vector<double> bh_fdr(std::span<const double> pvalues);

/// Two-sided normal p-value for a z statistic.
double normal_two_sided_p(double z);

constexpr double ci_quantile = 1.96;

enum class Tier
{
    ThreeStar,
    TwoStar,
    OneStar,
    NotSignificant,
};

Tier tier_from_q(double q);
std::string_view tier_text(Tier tier); // "***", "**", "*", "ns"

struct EffectRow
{
    std::string feature; // for interactions the language feature name, without ":NEW"
    TermFamily family = TermFamily::Main;
    double beta = 0.0;
    double se = 0.0;
    double z = 0.0;
    double p = 1.0;
    double q = 1.0;
    double odds_ratio = 1.0;
    double ci_low = 1.0;
    double ci_high = 1.0;
    Tier tier = Tier::NotSignificant;
};

struct EffectReport
{
    std::string outcome;
    std::vector<EffectRow> main;        // beta family, BH within
    std::vector<EffectRow> interaction; // theta family, BH within
    std::vector<EffectRow> controls;    // Z and NEW, q = p
    std::vector<std::string> dropped;
    bool separation_warning = false;
    double ridge = 0.0;
    std::size_t rows = 0;
    double df = 0.0; // t reference for p-values; 0 means normal
};

/// p from Student t with `df` degrees of freedom when df > 0, else normal.
/// The interval always uses ci_quantile.
EffectRow make_effect_row(std::string feature, TermFamily family, double beta, double se, double df = 0.0);

/// Builds effect rows from a converged fit and a covariance (usually the
/// cluster-robust one), applying BH separately to main and interaction terms.
/// With clustered covariance pass df = G - 1.
EffectReport effect_tables(const FitResult& fit, const Matrix& cov, const std::string& outcome, double df = 0.0);

struct NewcomerRow
{
    std::string feature;
    double or_vet = 1.0;
    Tier tier_vet = Tier::NotSignificant;
    double or_interaction = 1.0;
    Tier tier_interaction = Tier::NotSignificant;
    double or_new = 1.0; // or_vet * or_interaction
};

struct NewcomerTable
{
    std::vector<NewcomerRow> rows;
    std::vector<std::string> omitted; // features lacking a counterpart
};

NewcomerTable newcomer_composition(const EffectReport& report);

} // namespace approval

#endif // APPROVAL_INFERENCE_HPP
