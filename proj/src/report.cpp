#include "approval/report.hpp"

#include "approval/csv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace approval::report
{

namespace
{

std::string full(double v)
{
    return std::isfinite(v) ? format_full(v) : (std::isnan(v) ? std::string() : (v > 0 ? "inf" : "-inf"));
}

std::string opt(const std::optional<double>& v)
{
    return v ? full(*v) : std::string();
}

std::string family_name(TermFamily f)
{
    return std::string(to_string(f));
}

void md_row(std::string& out, const std::vector<std::string>& cells)
{
    out += "|";
    for (const auto& c : cells)
        out += " " + c + " |";
    out += "\n";
}

void md_rule(std::string& out, std::size_t n)
{
    out += "|";
    for (std::size_t k = 0; k < n; ++k)
        out += "---|";
    out += "\n";
}

} // namespace

std::string format_or(double odds_ratio)
{
    return format_fixed(odds_ratio, 2);
}

std::string direction_arrow(double odds_ratio)
{
    const std::string shown = format_or(odds_ratio);
    if (shown == "1.00")
        return "—";
    return odds_ratio > 1.0 ? "↑↑" : "↓↓";
}

std::string tier_cell(Tier tier)
{
    return tier == Tier::NotSignificant ? "-" : std::string(tier_text(tier));
}

std::string effect_cell(const EffectRow& row)
{
    return format_or(row.odds_ratio) + " " + tier_cell(row.tier) + ", " + direction_arrow(row.odds_ratio);
}

Rendered render_tables(const std::vector<EffectReport>& reports, const std::string& manifest_hash)
{
    Rendered r;
    std::ostringstream csv_out;
    csv::Writer w(csv_out);
    w.comment("manifest=" + manifest_hash);
    w.row({"outcome", "family", "feature", "beta", "se", "z", "p", "q", "odds_ratio", "ci_low", "ci_high", "tier"});

    std::vector<std::string> header{"Feature"};
    for (const auto& rep : reports)
        header.push_back(rep.outcome);

    auto section = [&](const std::string& title, auto member) {
        std::vector<std::string> order;
        std::set<std::string> seen;
        std::vector<std::map<std::string, const EffectRow*>> by_outcome;
        for (const auto& rep : reports)
        {
            by_outcome.emplace_back();
            for (const auto& row : rep.*member)
            {
                by_outcome.back()[row.feature] = &row;
                if (seen.insert(row.feature).second)
                    order.push_back(row.feature);
                w.row({rep.outcome, family_name(row.family), row.feature, full(row.beta), full(row.se), full(row.z),
                       full(row.p), full(row.q), full(row.odds_ratio), full(row.ci_low), full(row.ci_high),
                       std::string(tier_text(row.tier))});
            }
        }
        r.markdown += "## " + title + "\n\n";
        md_row(r.markdown, header);
        md_rule(r.markdown, header.size());
        for (const auto& f : order)
        {
            std::vector<std::string> cells{f};
            for (const auto& m : by_outcome)
            {
                auto it = m.find(f);
                cells.push_back(it == m.end() ? std::string() : effect_cell(*it->second));
            }
            md_row(r.markdown, cells);
        }
        r.markdown += "\n";
    };
    r.markdown = "# Effects\n\nmanifest " + manifest_hash + "\n\n";
    section("Language effects", &EffectReport::main);
    section("Newcomer interactions", &EffectReport::interaction);
    section("Controls", &EffectReport::controls);
    for (const auto& rep : reports)
        if (rep.df > 0.0)
            r.markdown += "p-values (" + rep.outcome + "): Student t, " + format_fixed(rep.df, 0) + " df\n";
    for (const auto& rep : reports)
        if (!rep.dropped.empty() || rep.separation_warning)
        {
            r.markdown += "Notes (" + rep.outcome + "):";
            for (const auto& d : rep.dropped)
                r.markdown += " " + d + ";";
            if (rep.separation_warning)
                r.markdown += " quasi-separation warning, ridge " + full(rep.ridge) + ";";
            r.markdown += "\n";
        }
    r.csv = csv_out.str();
    return r;
}

std::vector<EffectReport> read_effects_csv(const csv::Table& table)
{
    const auto c_outcome = table.require_column("outcome");
    const auto c_family = table.require_column("family");
    const auto c_feature = table.require_column("feature");
    const auto c_beta = table.require_column("beta");
    const auto c_se = table.require_column("se");
    const auto c_p = table.require_column("p");
    const auto c_q = table.require_column("q");
    std::vector<EffectReport> reports;
    auto number = [](const std::string& s) {
        try
        {
            return std::stod(s);
        }
        catch (const std::exception&)
        {
            fail(ErrorKind::SchemaError, "effects CSV: not a number: '" + s + "'");
        }
    };
    for (const auto& row : table.rows)
    {
        const std::string& outcome = row[c_outcome];
        auto it = std::find_if(reports.begin(), reports.end(), [&](const auto& r) { return r.outcome == outcome; });
        if (it == reports.end())
        {
            reports.emplace_back();
            reports.back().outcome = outcome;
            it = reports.end() - 1;
        }
        const std::string& fam = row[c_family];
        TermFamily family = TermFamily::Main;
        if (fam == "interaction")
            family = TermFamily::Interaction;
        else if (fam == "covariate")
            family = TermFamily::Covariate;
        else if (fam == "newcomer")
            family = TermFamily::Newcomer;
        else if (fam != "main")
            fail(ErrorKind::SchemaError, "effects CSV: unknown family '" + fam + "'");
        EffectRow r = make_effect_row(row[c_feature], family, number(row[c_beta]), number(row[c_se]));
        r.p = number(row[c_p]);
        r.q = number(row[c_q]);
        r.tier = tier_from_q(r.q);
        (family == TermFamily::Main ? it->main : family == TermFamily::Interaction ? it->interaction : it->controls)
            .push_back(r);
    }
    return reports;
}

Rendered render_newcomer(const std::string& outcome, const NewcomerTable& table, const std::string& manifest_hash)
{
    Rendered r;
    std::ostringstream csv_out;
    csv::Writer w(csv_out);
    w.comment("manifest=" + manifest_hash);
    w.row({"outcome", "feature", "or_interaction", "tier_interaction", "or_vet", "tier_vet", "or_new"});
    r.markdown = "## Newcomer composition (" + outcome + ")\n\n";
    md_row(r.markdown, {"Feature", "Interaction OR", "q-sig", "Veterans OR", "Newcomers OR"});
    md_rule(r.markdown, 5);
    for (const auto& row : table.rows)
    {
        w.row({outcome, row.feature, full(row.or_interaction), std::string(tier_text(row.tier_interaction)),
               full(row.or_vet), std::string(tier_text(row.tier_vet)), full(row.or_new)});
        const bool vet_sig = row.tier_vet != Tier::NotSignificant;
        md_row(r.markdown, {row.feature, format_or(row.or_interaction), tier_cell(row.tier_interaction),
                            vet_sig ? format_or(row.or_vet) : "-", vet_sig ? format_or(row.or_new) : "-"});
    }
    r.markdown += "\n";
    r.csv = csv_out.str();
    return r;
}

std::string balance_csv(const std::vector<StratumDiagnostics>& strata, const std::vector<std::string>& covariates,
                        const std::string& manifest_hash)
{
    std::ostringstream out;
    csv::Writer w(out);
    w.comment("manifest=" + manifest_hash);
    std::vector<std::string> header{"subreddit", "decile", "positives", "controls"};
    for (const auto& c : covariates)
        header.push_back("smd_" + c);
    for (const char* h : {"mean_smd", "retained", "reasons"})
        header.push_back(h);
    w.row(header);
    for (const auto& s : strata)
    {
        std::vector<std::string> row{s.subreddit, std::to_string(s.decile), std::to_string(s.positives),
                                     std::to_string(s.controls)};
        for (std::size_t k = 0; k < covariates.size(); ++k)
            row.push_back(k < s.smd.size() ? full(s.smd[k]) : std::string());
        row.push_back(full(s.mean_smd));
        row.push_back(s.retained ? "true" : "false");
        row.push_back(reason_text(s.reasons));
        w.row(row);
    }
    return out.str();
}

std::string balance_summary_csv(const BalanceSummary& summary, const std::string& manifest_hash)
{
    std::ostringstream out;
    csv::Writer w(out);
    w.comment("manifest=" + manifest_hash);
    w.comment("strata_total=" + std::to_string(summary.strata_total) +
              " strata_retained=" + std::to_string(summary.strata_retained));
    w.row({"covariate", "smd_unmatched", "smd_stratified"});
    for (std::size_t k = 0; k < summary.covariates.size(); ++k)
        w.row({summary.covariates[k], full(summary.unmatched[k]), full(summary.stratified[k])});
    w.row({"mean", full(summary.unmatched_mean), full(summary.stratified_mean)});
    return out.str();
}

std::string auc_csv(const AucComparison& comparison, const std::optional<BaselineResult>& baseline,
                    const std::string& manifest_hash)
{
    std::ostringstream out;
    csv::Writer w(out);
    w.comment("manifest=" + manifest_hash);
    w.row({"scope", "rows", "test_rows", "global_auc", "local_auc", "delta", "status"});
    w.row({"global", "", std::to_string(comparison.split.test.size()), full(comparison.global_auc), "", "", "ok"});
    if (comparison.logistic_auc)
        w.row({"logistic_all_features", "", "", full(*comparison.logistic_auc), "", "", "ok"});
    if (baseline)
        w.row({"prosociality_baseline", "", "", full(baseline->auc), "", "", "ok"});
    for (const auto& c : comparison.communities)
        w.row({c.subreddit, std::to_string(c.rows), std::to_string(c.test_rows), opt(c.global_auc), opt(c.local_auc),
               opt(c.delta), c.status});
    return out.str();
}

std::string auc_delta_csv(const AucComparison& comparison, const std::string& manifest_hash)
{
    std::vector<const CommunityAuc*> rows;
    for (const auto& c : comparison.communities)
        if (c.delta)
            rows.push_back(&c);
    std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
        if (*a->delta != *b->delta)
            return *a->delta > *b->delta;
        return a->subreddit < b->subreddit;
    });
    std::ostringstream out;
    csv::Writer w(out);
    w.comment("manifest=" + manifest_hash);
    w.row({"subreddit", "delta", "group"});
    std::set<std::string> gains(comparison.top_gains.begin(), comparison.top_gains.end());
    std::set<std::string> losses(comparison.top_losses.begin(), comparison.top_losses.end());
    for (const auto* c : rows)
        w.row({c->subreddit, full(*c->delta),
               gains.count(c->subreddit) ? "gain" : (losses.count(c->subreddit) ? "loss" : "")});
    return out.str();
}

std::string auc_markdown(const AucComparison& comparison, const std::optional<BaselineResult>& baseline)
{
    std::string md = "## Prediction\n\n";
    md_row(md, {"Model", "AUC"});
    md_rule(md, 2);
    md_row(md, {"Global boosted trees", format_fixed(comparison.global_auc, 3)});
    if (comparison.logistic_auc)
        md_row(md, {"Logistic, all features", format_fixed(*comparison.logistic_auc, 3)});
    if (baseline)
        md_row(md, {"Prosociality composite", format_fixed(baseline->auc, 3)});
    md_row(md, {"Mean local (communities with a local model)", format_fixed(comparison.mean_local, 3)});
    md_row(md, {"Mean global (same communities)", format_fixed(comparison.mean_global, 3)});
    md += "\n";
    return md;
}

std::string distinct_csv(const CentroidReport& report, const std::vector<std::string>& gains,
                         const std::vector<std::string>& losses, const std::string& manifest_hash)
{
    std::set<std::string> g(gains.begin(), gains.end()), l(losses.begin(), losses.end());
    std::ostringstream out;
    csv::Writer w(out);
    w.comment("manifest=" + manifest_hash);
    w.row({"subreddit", "distance", "sample_size", "available", "group"});
    for (const auto& c : report.communities)
        w.row({c.subreddit, full(c.distance), std::to_string(c.sample_size), std::to_string(c.available),
               g.count(c.subreddit) ? "gain" : (l.count(c.subreddit) ? "loss" : "")});
    return out.str();
}

std::string welch_csv(const std::optional<WelchResult>& welch, const std::string& status,
                      const std::string& manifest_hash)
{
    std::ostringstream out;
    csv::Writer w(out);
    w.comment("manifest=" + manifest_hash);
    w.row({"mean_gain", "mean_loss", "var_gain", "var_loss", "n_gain", "n_loss", "t", "df", "p", "status"});
    if (welch)
        w.row({full(welch->mean_g), full(welch->mean_l), full(welch->var_g), full(welch->var_l),
               std::to_string(welch->n_g), std::to_string(welch->n_l), full(welch->t), full(welch->df),
               full(welch->p), status});
    else
        w.row({"", "", "", "", "", "", "", "", "", status});
    return out.str();
}

} // namespace approval::report
