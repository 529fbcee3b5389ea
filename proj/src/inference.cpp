#include "approval/inference.hpp"

#include "approval/special.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace approval
{

std::vector<double> bh_fdr(std::span<const double> pvalues)
{
    const std::size_t m = pvalues.size();
    for (double p : pvalues)
        if (!(p >= 0.0 && p <= 1.0))
            fail(ErrorKind::InvalidPValue, "p-value outside [0,1]: " + format_full(p));
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
    std::vector<double> q(m);
    double running = 1.0;
    for (std::size_t r = m; r-- > 0;)
    {
        const double v = pvalues[order[r]] * (static_cast<double>(m) / static_cast<double>(r + 1));
        running = std::min(running, v);
        q[order[r]] = std::min(running, 1.0);
    }
    return q;
}

double normal_two_sided_p(double z)
{
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

Tier tier_from_q(double q)
{
    if (q < 0.001)
        return Tier::ThreeStar;
    if (q < 0.01)
        return Tier::TwoStar;
    if (q < 0.05)
        return Tier::OneStar;
    return Tier::NotSignificant;
}

std::string_view tier_text(Tier tier)
{
    switch (tier)
    {
    case Tier::ThreeStar: return "***";
    case Tier::TwoStar: return "**";
    case Tier::OneStar: return "*";
    case Tier::NotSignificant: return "ns";
    }
    return "ns";
}

EffectRow make_effect_row(std::string feature, TermFamily family, double beta, double se, double df)
{
    EffectRow r;
    r.feature = std::move(feature);
    r.family = family;
    r.beta = beta;
    r.se = se;
    r.z = se > 0.0 ? beta / se : 0.0;
    if (se <= 0.0)
        r.p = 1.0;
    else
        r.p = df > 0.0 ? student_t_two_sided(r.z, df) : normal_two_sided_p(r.z);
    r.q = r.p;
    r.odds_ratio = std::exp(beta);
    r.ci_low = std::exp(beta - ci_quantile * se);
    r.ci_high = std::exp(beta + ci_quantile * se);
    r.tier = tier_from_q(r.q);
    return r;
}

namespace
{

void apply_bh(std::vector<EffectRow>& rows)
{
    std::vector<double> p;
    for (const auto& r : rows)
        p.push_back(r.p);
    const auto q = bh_fdr(p);
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        rows[i].q = q[i];
        rows[i].tier = tier_from_q(q[i]);
    }
}

} // namespace

EffectReport effect_tables(const FitResult& fit, const Matrix& cov, const std::string& outcome, double df)
{
    if (cov.rows() != fit.beta.size() || cov.cols() != fit.beta.size())
        fail(ErrorKind::ShapeError, "covariance does not match the coefficient vector");
    EffectReport report;
    report.outcome = outcome;
    report.dropped = fit.dropped;
    report.separation_warning = fit.separation_warning;
    report.ridge = fit.ridge;
    report.rows = fit.rows;
    report.df = df;
    for (std::size_t j = 0; j < fit.names.size(); ++j)
    {
        const auto fam = fit.families[j];
        const double se = std::sqrt(std::max(0.0, cov(static_cast<Index>(j), static_cast<Index>(j))));
        const double beta = fit.beta(static_cast<Index>(j));
        switch (fam)
        {
        case TermFamily::Main: report.main.push_back(make_effect_row(fit.names[j], fam, beta, se, df)); break;
        case TermFamily::Interaction:
        {
            std::string name = fit.names[j];
            if (name.size() > 4 && name.compare(name.size() - 4, 4, ":NEW") == 0)
                name.resize(name.size() - 4);
            report.interaction.push_back(make_effect_row(name, fam, beta, se, df));
            break;
        }
        case TermFamily::Covariate:
        case TermFamily::Newcomer: report.controls.push_back(make_effect_row(fit.names[j], fam, beta, se, df)); break;
        default: break;
        }
    }
    apply_bh(report.main);
    apply_bh(report.interaction);
    return report;
}

NewcomerTable newcomer_composition(const EffectReport& report)
{
    NewcomerTable table;
    std::map<std::string, const EffectRow*> main;
    for (const auto& r : report.main)
        main[r.feature] = &r;
    std::map<std::string, bool> paired;
    for (const auto& r : report.interaction)
    {
        auto it = main.find(r.feature);
        if (it == main.end())
        {
            table.omitted.push_back(r.feature + ": no main effect");
            continue;
        }
        paired[r.feature] = true;
        NewcomerRow row;
        row.feature = r.feature;
        row.or_vet = it->second->odds_ratio;
        row.tier_vet = it->second->tier;
        row.or_interaction = r.odds_ratio;
        row.tier_interaction = r.tier;
        row.or_new = row.or_vet * row.or_interaction;
        table.rows.push_back(row);
    }
    for (const auto& r : report.main)
        if (!paired.count(r.feature))
            table.omitted.push_back(r.feature + ": no interaction term");
    return table;
}

} // namespace approval
