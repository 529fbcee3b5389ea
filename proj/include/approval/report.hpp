#ifndef APPROVAL_REPORT_HPP
#define APPROVAL_REPORT_HPP

#include "approval/csv.hpp"
#include "approval/distinct.hpp"
#include "approval/evaluation.hpp"
#include "approval/inference.hpp"
#include "approval/stratify.hpp"

#include <optional>
#include <string>
#include <vector>

namespace approval::report
{

/// "↑↑" when the two-decimal OR exceeds 1.00, "↓↓" below it, "—" at exactly 1.00.
std::string direction_arrow(double odds_ratio);
/// Stars, or "-" for the non-significant tier.
std::string tier_cell(Tier tier);
/// "1.43 ***, ↑↑"
std::string effect_cell(const EffectRow& row);
std::string format_or(double odds_ratio);

struct Rendered
{
    std::string markdown;
    std::string csv;
};

/// Effect tables across outcomes plus the newcomer composition of each report.
/// An empty list yields header-only output.
Rendered render_tables(const std::vector<EffectReport>& reports, const std::string& manifest_hash);

/// Rebuilds reports from an effects CSV written by render_tables (outcomes in file order).
std::vector<EffectReport> read_effects_csv(const csv::Table& table);

/// Veteran, interaction and newcomer ORs; vet/new cells are "-" when the veteran term is not significant.
Rendered render_newcomer(const std::string& outcome, const NewcomerTable& table, const std::string& manifest_hash);

std::string balance_csv(const std::vector<StratumDiagnostics>& strata, const std::vector<std::string>& covariates,
                        const std::string& manifest_hash);
std::string balance_summary_csv(const BalanceSummary& summary, const std::string& manifest_hash);

std::string auc_csv(const AucComparison& comparison, const std::optional<BaselineResult>& baseline,
                    const std::string& manifest_hash);
/// Per-community local minus global deltas, sorted for a horizontal bar chart.
std::string auc_delta_csv(const AucComparison& comparison, const std::string& manifest_hash);
std::string auc_markdown(const AucComparison& comparison, const std::optional<BaselineResult>& baseline);

std::string distinct_csv(const CentroidReport& report, const std::vector<std::string>& gains,
                         const std::vector<std::string>& losses, const std::string& manifest_hash);
std::string welch_csv(const std::optional<WelchResult>& welch, const std::string& status,
                      const std::string& manifest_hash);

} // namespace approval::report

#endif // APPROVAL_REPORT_HPP
