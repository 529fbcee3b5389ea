#include "approval/design.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace approval
{

std::string_view to_string(TermFamily family)
{
    switch (family)
    {
    case TermFamily::Intercept: return "intercept";
    case TermFamily::Main: return "main";
    case TermFamily::Interaction: return "interaction";
    case TermFamily::Covariate: return "covariate";
    case TermFamily::Newcomer: return "newcomer";
    case TermFamily::FixedEffect: return "fixed_effect";
    }
    return "main";
}

Index SparseDesign::fe_columns() const
{
    Index k = 0;
    for (const auto& f : fe)
        k += static_cast<Index>(f.levels.size());
    return k;
}

std::vector<std::string> SparseDesign::column_names() const
{
    auto names = dense_names;
    for (const auto& f : fe)
        for (const auto& l : f.levels)
            names.push_back(f.family + "[" + l + "]");
    return names;
}

std::vector<TermFamily> SparseDesign::column_families() const
{
    auto fam = dense_family;
    fam.insert(fam.end(), static_cast<std::size_t>(fe_columns()), TermFamily::FixedEffect);
    return fam;
}

Vector SparseDesign::linear_predictor(const Vector& b) const
{
    Vector eta = dense * b.head(dense.cols()) + offset;
    Index o = dense.cols();
    for (const auto& f : fe)
    {
        for (Index i = 0; i < rows(); ++i)
            if (const int l = f.level_of_row[static_cast<std::size_t>(i)]; l >= 0)
                eta(i) += b(o + l);
        o += static_cast<Index>(f.levels.size());
    }
    return eta;
}

Vector SparseDesign::xt(const Vector& v) const
{
    Vector g(cols());
    g.head(dense.cols()).noalias() = dense.transpose() * v;
    g.tail(fe_columns()).setZero();
    Index o = dense.cols();
    for (const auto& f : fe)
    {
        for (Index i = 0; i < rows(); ++i)
            if (const int l = f.level_of_row[static_cast<std::size_t>(i)]; l >= 0)
                g(o + l) += v(i);
        o += static_cast<Index>(f.levels.size());
    }
    return g;
}

Matrix SparseDesign::xtwx(const Vector& w) const
{
    const Index pd = dense.cols();
    const Index p = cols();
    Matrix h = Matrix::Zero(p, p);
    const Matrix dw = dense.array().colwise() * w.array();
    h.topLeftCorner(pd, pd).noalias() = dw.transpose() * dense;

    std::vector<Index> offsets;
    Index o = pd;
    for (const auto& f : fe)
    {
        offsets.push_back(o);
        o += static_cast<Index>(f.levels.size());
    }
    for (std::size_t k = 0; k < fe.size(); ++k)
    {
        const auto& lk = fe[k].level_of_row;
        Matrix cross = Matrix::Zero(pd, static_cast<Index>(fe[k].levels.size()));
        for (Index i = 0; i < rows(); ++i)
        {
            const int l = lk[static_cast<std::size_t>(i)];
            if (l < 0)
                continue;
            cross.col(l) += dw.row(i).transpose();
            h(offsets[k] + l, offsets[k] + l) += w(i);
            for (std::size_t m = k + 1; m < fe.size(); ++m)
                if (const int l2 = fe[m].level_of_row[static_cast<std::size_t>(i)]; l2 >= 0)
                    h(offsets[m] + l2, offsets[k] + l) += w(i);
        }
        h.block(offsets[k], 0, cross.cols(), pd) = cross.transpose();
    }
    return h.selfadjointView<Eigen::Lower>();
}

Matrix SparseDesign::cluster_scores(const Vector& v) const
{
    const Index g = static_cast<Index>(cluster_names.size());
    Matrix u = Matrix::Zero(g, cols());
    const Index pd = dense.cols();
    for (Index i = 0; i < rows(); ++i)
        u.row(cluster[static_cast<std::size_t>(i)]).head(pd) += v(i) * dense.row(i);
    Index o = pd;
    for (const auto& f : fe)
    {
        for (Index i = 0; i < rows(); ++i)
            if (const int l = f.level_of_row[static_cast<std::size_t>(i)]; l >= 0)
                u(cluster[static_cast<std::size_t>(i)], o + l) += v(i);
        o += static_cast<Index>(f.levels.size());
    }
    return u;
}

Matrix SparseDesign::to_dense() const
{
    Matrix x = Matrix::Zero(rows(), cols());
    x.leftCols(dense.cols()) = dense;
    Index o = dense.cols();
    for (const auto& f : fe)
    {
        for (Index i = 0; i < rows(); ++i)
            if (const int l = f.level_of_row[static_cast<std::size_t>(i)]; l >= 0)
                x(i, o + l) = 1.0;
        o += static_cast<Index>(f.levels.size());
    }
    return x;
}

namespace
{

struct RawFamily
{
    std::string name;
    std::vector<std::string> level_names; // sorted
    std::vector<int> raw_level;           // per row, index into level_names
    std::vector<bool> absorbed;
};

RawFamily make_family(const std::string& name, const std::vector<std::string>& keys)
{
    RawFamily f;
    f.name = name;
    std::set<std::string> unique(keys.begin(), keys.end());
    f.level_names.assign(unique.begin(), unique.end());
    std::map<std::string, int> index;
    for (std::size_t k = 0; k < f.level_names.size(); ++k)
        index[f.level_names[k]] = static_cast<int>(k);
    f.raw_level.reserve(keys.size());
    for (const auto& key : keys)
        f.raw_level.push_back(index[key]);
    f.absorbed.assign(f.level_names.size(), false);
    return f;
}

} // namespace

SparseDesign build_design(const DesignInputs& in, const ModelSpec& spec, double collinearity_tol)
{
    if (!in.table)
        fail(ErrorKind::ShapeError, "design needs a feature table");
    const FeatureTable& table = *in.table;
    const Index n = table.rows();
    const auto N = static_cast<std::size_t>(n);
    if (in.response.size() != N || in.newcomer.size() != N || in.cluster.size() != N)
        fail(ErrorKind::ShapeError, "design inputs must align with the table rows");
    if (spec.fixed_effects && (in.stratum.size() != N || in.day.size() != N || in.hour.size() != N))
        fail(ErrorKind::ShapeError, "fixed-effect keys must align with the table rows");
    if (n == 0)
        fail(ErrorKind::InsufficientRows, "design has no rows");

    SparseDesign d;
    std::vector<Vector> cols;
    auto add = [&](std::string name, TermFamily family, Vector v) {
        if (!v.allFinite())
            fail(ErrorKind::NumericError, "design column '" + name + "' has non-finite values");
        d.dense_names.push_back(std::move(name));
        d.dense_family.push_back(family);
        cols.push_back(std::move(v));
    };
    Vector is_new(n);
    for (Index i = 0; i < n; ++i)
        is_new(i) = in.newcomer[static_cast<std::size_t>(i)] ? 1.0 : 0.0;

    if (spec.intercept)
        add("(intercept)", TermFamily::Intercept, Vector::Ones(n));
    for (const auto& a : spec.language_terms)
        add(a, TermFamily::Main, table.col(a));
    if (spec.interactions)
        for (const auto& a : spec.language_terms)
            add(a + ":NEW", TermFamily::Interaction, table.col(a).cwiseProduct(is_new));
    for (const auto& z : spec.covariate_terms)
        add(z, TermFamily::Covariate, table.col(z));
    if (spec.newcomer_main)
        add("NEW", TermFamily::Newcomer, is_new);

    // Constant columns carry nothing beyond the intercept.
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < cols.size(); ++j)
    {
        const auto& v = cols[j];
        const double range = v.maxCoeff() - v.minCoeff();
        if (d.dense_family[j] != TermFamily::Intercept && !(range > 1e-12 * std::max(1.0, v.cwiseAbs().maxCoeff())))
            d.dropped.push_back(d.dense_names[j] + (v.cwiseAbs().maxCoeff() == 0.0 ? ": constant zero" : ": constant"));
        else
            keep.push_back(j);
    }
    d.dense.resize(n, static_cast<Index>(keep.size()));
    {
        std::vector<std::string> names;
        std::vector<TermFamily> fams;
        for (std::size_t k = 0; k < keep.size(); ++k)
        {
            d.dense.col(static_cast<Index>(k)) = cols[keep[k]];
            names.push_back(d.dense_names[keep[k]]);
            fams.push_back(d.dense_family[keep[k]]);
        }
        d.dense_names = std::move(names);
        d.dense_family = std::move(fams);
    }

    d.y.resize(n);
    for (Index i = 0; i < n; ++i)
        d.y(i) = in.response[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    d.offset = Vector::Zero(n);

    {
        std::set<std::string> unique(in.cluster.begin(), in.cluster.end());
        d.cluster_names.assign(unique.begin(), unique.end());
        std::map<std::string, int> idx;
        for (std::size_t g = 0; g < d.cluster_names.size(); ++g)
            idx[d.cluster_names[g]] = static_cast<int>(g);
        for (const auto& c : in.cluster)
            d.cluster.push_back(idx[c]);
    }

    if (spec.fixed_effects)
    {
        std::vector<RawFamily> fams{make_family("stratum", in.stratum), make_family("day", in.day),
                                    make_family("hour", in.hour)};
        // Absorb levels whose active rows share one outcome, until stable.
        bool changed = true;
        while (changed)
        {
            changed = false;
            for (auto& f : fams)
            {
                const std::size_t L = f.level_names.size();
                std::vector<int> pos(L, 0), all(L, 0);
                for (std::size_t i = 0; i < N; ++i)
                {
                    if (d.offset(static_cast<Index>(i)) != 0.0)
                        continue;
                    const int l = f.raw_level[i];
                    ++all[static_cast<std::size_t>(l)];
                    pos[static_cast<std::size_t>(l)] += in.response[i] ? 1 : 0;
                }
                for (std::size_t l = 0; l < L; ++l)
                {
                    if (f.absorbed[l] || all[l] == 0 || (pos[l] != 0 && pos[l] != all[l]))
                        continue;
                    f.absorbed[l] = true;
                    changed = true;
                    d.absorbed.push_back(f.name + "[" + f.level_names[l] + "]");
                    for (std::size_t i = 0; i < N; ++i)
                        if (f.raw_level[i] == static_cast<int>(l) && d.offset(static_cast<Index>(i)) == 0.0)
                            d.offset(static_cast<Index>(i)) = in.response[i] ? absorbed_offset : -absorbed_offset;
                }
            }
        }
        d.separation_flag = !d.absorbed.empty();
        for (auto& f : fams)
        {
            FixedEffectBlock block;
            block.family = f.name;
            std::vector<int> column_of(f.level_names.size(), -1);
            bool reference_taken = false;
            for (std::size_t l = 0; l < f.level_names.size(); ++l)
            {
                if (f.absorbed[l])
                    continue;
                if (!reference_taken)
                {
                    reference_taken = true;
                    continue;
                }
                column_of[l] = static_cast<int>(block.levels.size());
                block.levels.push_back(f.level_names[l]);
            }
            block.level_of_row.resize(N);
            for (std::size_t i = 0; i < N; ++i)
                block.level_of_row[i] = column_of[static_cast<std::size_t>(f.raw_level[i])];
            d.fe.push_back(std::move(block));
        }
    }

    prune_collinear(d, collinearity_tol);
    return d;
}

std::vector<std::string> prune_collinear(SparseDesign& d, double rel_tol)
{
    std::vector<Index> active;
    for (Index i = 0; i < d.rows(); ++i)
        if (d.offset(i) == 0.0)
            active.push_back(i);
    const Index p = d.cols();
    if (p == 0)
        return {};
    Matrix x = d.to_dense()(active, Eigen::all);
    for (Index j = 0; j < p; ++j)
    {
        const double norm = x.col(j).norm();
        if (norm > 0.0)
            x.col(j) /= norm;
    }
    std::vector<bool> drop(static_cast<std::size_t>(p), false);
    if (x.rows() == 0)
        std::fill(drop.begin(), drop.end(), true);
    else
    {
        Matrix r;
        if (x.rows() > p)
        {
            Eigen::HouseholderQR<Matrix> qr(x);
            r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
        }
        else
            r = x;
        Eigen::ColPivHouseholderQR<Matrix> piv(r);
        piv.setThreshold(rel_tol);
        const Index rank = piv.rank();
        for (Index k = rank; k < p; ++k)
            drop[static_cast<std::size_t>(piv.colsPermutation().indices()(k))] = true;
    }

    std::vector<std::string> pruned;
    const auto names = d.column_names();
    for (Index j = 0; j < p; ++j)
        if (drop[static_cast<std::size_t>(j)])
            pruned.push_back(names[static_cast<std::size_t>(j)]);
    if (pruned.empty())
        return pruned;

    std::vector<Index> keep_dense;
    std::vector<std::string> dn;
    std::vector<TermFamily> df;
    for (Index j = 0; j < d.dense.cols(); ++j)
        if (!drop[static_cast<std::size_t>(j)])
        {
            keep_dense.push_back(j);
            dn.push_back(d.dense_names[static_cast<std::size_t>(j)]);
            df.push_back(d.dense_family[static_cast<std::size_t>(j)]);
        }
    d.dense = Matrix(d.dense(Eigen::all, keep_dense));
    d.dense_names = std::move(dn);
    d.dense_family = std::move(df);

    Index o = static_cast<Index>(drop.size()) - d.fe_columns();
    for (auto& f : d.fe)
    {
        std::vector<int> remap(f.levels.size(), -1);
        std::vector<std::string> levels;
        for (std::size_t l = 0; l < f.levels.size(); ++l)
            if (!drop[static_cast<std::size_t>(o + static_cast<Index>(l))])
            {
                remap[l] = static_cast<int>(levels.size());
                levels.push_back(f.levels[l]);
            }
        o += static_cast<Index>(f.levels.size());
        for (auto& l : f.level_of_row)
            if (l >= 0)
                l = remap[static_cast<std::size_t>(l)];
        f.levels = std::move(levels);
    }
    for (const auto& name : pruned)
        d.dropped.push_back(name + ": collinear");
    return pruned;
}

} // namespace approval
