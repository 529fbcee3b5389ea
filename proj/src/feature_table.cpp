#include "approval/feature_table.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

namespace approval
{

std::string_view to_string(Role role)
{
    switch (role)
    {
    case Role::Language: return "language";
    case Role::Covariate: return "covariate";
    case Role::Indicator: return "indicator";
    case Role::Auxiliary: return "auxiliary";
    }
    return "auxiliary";
}

std::string_view to_string(Provenance provenance)
{
    switch (provenance)
    {
    case Provenance::Raw: return "raw";
    case Provenance::Engineered: return "engineered";
    case Provenance::Standardized: return "standardized";
    }
    return "raw";
}

FeatureTable::FeatureTable(std::vector<std::string> row_ids)
    : row_ids_(std::move(row_ids)), values_(static_cast<Index>(row_ids_.size()), 0)
{
}

std::optional<Index> FeatureTable::find(const std::string& name) const
{
    for (std::size_t j = 0; j < columns_.size(); ++j)
        if (columns_[j].name == name)
            return static_cast<Index>(j);
    return std::nullopt;
}

Index FeatureTable::index(const std::string& name) const
{
    if (auto j = find(name))
        return *j;
    fail(ErrorKind::SchemaError, "feature table has no column '" + name + "'");
}

void FeatureTable::add_column(ColumnInfo info, const Eigen::Ref<const Vector>& values)
{
    add_columns({std::move(info)}, values);
}

void FeatureTable::add_columns(const std::vector<ColumnInfo>& infos, const Eigen::Ref<const Matrix>& block)
{
    if (block.rows() != rows() || block.cols() != static_cast<Index>(infos.size()))
        fail(ErrorKind::ShapeError, "column block does not match the table shape");
    for (const auto& info : infos)
        if (find(info.name))
            fail(ErrorKind::SchemaError, "duplicate feature column '" + info.name + "'");
    const Index old = cols();
    values_.conservativeResize(rows(), old + block.cols());
    values_.rightCols(block.cols()) = block;
    columns_.insert(columns_.end(), infos.begin(), infos.end());
}

void FeatureTable::replace_column(const std::string& old_name, ColumnInfo info, const Eigen::Ref<const Vector>& values)
{
    const Index j = index(old_name);
    if (values.size() != rows())
        fail(ErrorKind::ShapeError, "replacement column has the wrong length");
    if (info.name != old_name && find(info.name))
        fail(ErrorKind::SchemaError, "duplicate feature column '" + info.name + "'");
    values_.col(j) = values;
    columns_[static_cast<std::size_t>(j)] = std::move(info);
}

void FeatureTable::drop_columns(const std::vector<std::string>& names)
{
    if (names.empty())
        return;
    std::set<std::string> drop(names.begin(), names.end());
    std::vector<Index> keep;
    std::vector<ColumnInfo> kept;
    for (std::size_t j = 0; j < columns_.size(); ++j)
        if (!drop.count(columns_[j].name))
        {
            keep.push_back(static_cast<Index>(j));
            kept.push_back(columns_[j]);
        }
    values_ = Matrix(values_(Eigen::all, keep));
    columns_ = std::move(kept);
}

std::vector<std::string> FeatureTable::names(std::optional<Role> role) const
{
    std::vector<std::string> out;
    for (const auto& c : columns_)
        if (!role || c.role == *role)
            out.push_back(c.name);
    return out;
}

Matrix FeatureTable::gather(const std::vector<std::string>& names) const
{
    std::vector<Index> idx;
    idx.reserve(names.size());
    for (const auto& n : names)
        idx.push_back(index(n));
    return values_(Eigen::all, idx);
}

FeatureTable FeatureTable::select_rows(const std::vector<Index>& rows) const
{
    FeatureTable out;
    out.row_ids_.reserve(rows.size());
    for (Index r : rows)
        out.row_ids_.push_back(row_ids_[static_cast<std::size_t>(r)]);
    out.columns_ = columns_;
    out.values_ = values_(rows, Eigen::all);
    return out;
}

StandardizationParams standardize(FeatureTable& table, const std::vector<Index>& population)
{
    if (population.empty())
        fail(ErrorKind::InsufficientRows, "standardization population is empty");
    StandardizationParams params;
    params.population_size = population.size();
    std::vector<std::string> targets;
    for (const auto& c : table.columns())
        if (c.role == Role::Language || c.role == Role::Covariate)
            targets.push_back(c.name);

    std::vector<double> means, sds;
    std::vector<std::string> kept;
    for (const auto& name : targets)
    {
        const auto x = table.col(name);
        double sum = 0.0;
        std::size_t n = 0;
        for (Index r : population)
            if (!std::isnan(x(r)))
            {
                sum += x(r);
                ++n;
            }
        if (n == 0)
        {
            params.dropped_constant.push_back(name);
            continue;
        }
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (Index r : population)
            if (!std::isnan(x(r)))
                ss += (x(r) - mean) * (x(r) - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n));
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean))))
        {
            params.dropped_constant.push_back(name);
            continue;
        }
        kept.push_back(name);
        means.push_back(mean);
        sds.push_back(sd);
    }
    if (kept.empty())
        fail(ErrorKind::NoVaryingColumns, "every candidate column is constant on the fitting population");

    table.drop_columns(params.dropped_constant);
    params.names = kept;
    params.mean = Eigen::Map<const Vector>(means.data(), static_cast<Index>(means.size()));
    params.sd = Eigen::Map<const Vector>(sds.data(), static_cast<Index>(sds.size()));
    for (std::size_t k = 0; k < kept.size(); ++k)
    {
        const Index j = table.index(kept[k]);
        auto x = table.values().col(j);
        x = ((x.array() - means[k]) / sds[k]).matrix();
        for (Index r = 0; r < x.size(); ++r)
            if (std::isnan(x(r)))
                x(r) = 0.0;
        auto info = table.columns()[static_cast<std::size_t>(j)];
        info.provenance = Provenance::Standardized;
        table.replace_column(kept[k], info, x);
    }
    return params;
}

} // namespace approval
