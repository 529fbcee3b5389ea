#include "approval/residual.hpp"

#include <cmath>

namespace approval
{

std::vector<ResidualFit> fit_residual_umbrellas(FeatureTable& table, const lexicon::LexiconHierarchy& lexicon,
                                                const std::vector<Index>& population)
{
    std::vector<ResidualFit> fits;
    for (const auto& [umbrella, children] : lexicon.umbrella_children())
    {
        table.index(umbrella);
        const Matrix kids = table.gather(children);
        const Vector u = table.col(umbrella);

        std::vector<Index> rows;
        for (Index r : population)
            if (!std::isnan(u(r)) && !kids.row(r).hasNaN())
                rows.push_back(r);
        if (rows.size() < children.size() + 2)
            fail(ErrorKind::InsufficientRows, "umbrella '" + umbrella + "' needs at least children+2 rows");

        std::vector<Index> dropped;
        const Vector b = ols_with_intercept(u(rows), kids(rows, Eigen::all), dropped);

        ResidualFit fit;
        fit.umbrella = umbrella;
        fit.intercept = b(0);
        for (std::size_t c = 0; c < children.size(); ++c)
            fit.weights[children[c]] = b(static_cast<Index>(c) + 1);
        for (Index d : dropped)
            fit.dropped_children.push_back(children[static_cast<std::size_t>(d)]);
        fit.residual_column = "other_" + umbrella;

        const Vector resid = ((u - kids * b.tail(b.size() - 1)).array() - b(0)).matrix();
        ColumnInfo info = table.info(umbrella);
        info.name = fit.residual_column;
        info.provenance = Provenance::Engineered;
        info.note = "residual";
        table.replace_column(umbrella, info, resid);
        fits.push_back(std::move(fit));
    }
    return fits;
}

} // namespace approval
