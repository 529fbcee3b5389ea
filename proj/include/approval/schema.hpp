#ifndef APPROVAL_SCHEMA_HPP
#define APPROVAL_SCHEMA_HPP

#include "approval/csv.hpp"

#include <optional>
#include <string>
#include <vector>

namespace approval::schema
{

enum class ColumnType
{
    String,
    Integer,
    Real,
    Boolean,
};

struct ColumnSpec
{
    std::string name;
    ColumnType type = ColumnType::String;
    bool required = false;
    bool nullable = false;
    bool unique = false;
    std::optional<double> min;
    std::optional<double> max;
};

/// A numbered family such as emb_000..emb_383: either every member is present or none.
struct ColumnGroup
{
    std::string prefix;
    int count = 0;
    int width = 3;
    ColumnSpec member; // name unused; type/range/nullable shared by members

    std::string member_name(int i) const;
};

struct Manifest
{
    std::string name;
    int version = 1;
    std::vector<ColumnSpec> columns;
    std::vector<ColumnGroup> groups;

    static Manifest load(const std::string& path);
    static Manifest parse(const std::string& json_text);
    /// The built-in canonical post schema (identical to schema/canonical_posts.json).
    static Manifest canonical();

    std::string to_json() const;
};

struct Issue
{
    std::optional<std::size_t> row; // 1-based data row
    std::string column;
    std::string message;
};

struct ValidationReport
{
    std::vector<Issue> issues;
    std::size_t rows = 0;

    bool ok() const { return issues.empty(); }
    /// Machine-readable JSON list of issues.
    std::string to_json() const;
};

ValidationReport validate(const csv::Table& table, const Manifest& manifest, std::size_t max_issues = 1000);

bool parse_bool(const std::string& text, bool& out);

} // namespace approval::schema

#endif // APPROVAL_SCHEMA_HPP
