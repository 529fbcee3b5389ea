#ifndef APPROVAL_FEATURE_TABLE_HPP
#define APPROVAL_FEATURE_TABLE_HPP

#include "approval/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace approval
{

/// Who may consume a column. Risk models accept Covariate columns only.
enum class Role
{
    Language,  // A
    Covariate, // Z
    Indicator, // NEW
    Auxiliary, // carried along, never modelled
};

enum class Provenance
{
    Raw,
    Engineered,
    Standardized,
};

std::string_view to_string(Role role);
std::string_view to_string(Provenance provenance);

struct ColumnInfo
{
    std::string name;
    Role role = Role::Language;
    Provenance provenance = Provenance::Raw;
    std::string note; // e.g. "log1p", "clr", "residual"
};

/// Named, typed columns aligned to post rows.
class FeatureTable
{
public:
    FeatureTable() = default;
    explicit FeatureTable(std::vector<std::string> row_ids);

    Index rows() const { return static_cast<Index>(row_ids_.size()); }
    Index cols() const { return static_cast<Index>(columns_.size()); }

    const std::vector<std::string>& row_ids() const { return row_ids_; }
    const std::vector<ColumnInfo>& columns() const { return columns_; }
    const Matrix& values() const { return values_; }
    Matrix& values() { return values_; }

    std::optional<Index> find(const std::string& name) const;
    Index index(const std::string& name) const; // throws SchemaError
    const ColumnInfo& info(const std::string& name) const { return columns_[static_cast<std::size_t>(index(name))]; }
    auto col(const std::string& name) const { return values_.col(index(name)); }
    auto col(const std::string& name) { return values_.col(index(name)); }

    void add_column(ColumnInfo info, const Eigen::Ref<const Vector>& values);
    void add_columns(const std::vector<ColumnInfo>& infos, const Eigen::Ref<const Matrix>& block);
    void replace_column(const std::string& old_name, ColumnInfo info, const Eigen::Ref<const Vector>& values);
    void drop_columns(const std::vector<std::string>& names);

    std::vector<std::string> names(std::optional<Role> role = std::nullopt) const;
    /// Dense block of the named columns, in the given order.
    Matrix gather(const std::vector<std::string>& names) const;
    FeatureTable select_rows(const std::vector<Index>& rows) const;

private:
    std::vector<std::string> row_ids_;
    std::vector<ColumnInfo> columns_;
    Matrix values_;
};

struct StandardizationParams
{
    std::vector<std::string> names;
    Vector mean;
    Vector sd; // population SD
    std::vector<std::string> dropped_constant;
    std::size_t population_size = 0;
};

/// Z-scores every Language and Covariate column with mean/SD taken over
/// `population` rows (NaN cells ignored), applies them to all rows, then
/// imputes remaining NaN cells as 0. Constant columns are dropped.
/// Throws NoVaryingColumns when nothing is left to standardize.
StandardizationParams standardize(FeatureTable& table, const std::vector<Index>& population);

} // namespace approval

#endif // APPROVAL_FEATURE_TABLE_HPP
