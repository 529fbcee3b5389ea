#include "approval/schema.hpp"

#include "approval/common.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace approval::schema
{

using nlohmann::json;

namespace
{

ColumnType parse_type(const std::string& s)
{
    if (s == "string")
        return ColumnType::String;
    if (s == "integer")
        return ColumnType::Integer;
    if (s == "real")
        return ColumnType::Real;
    if (s == "boolean")
        return ColumnType::Boolean;
    fail(ErrorKind::SchemaError, "unknown column type '" + s + "'");
}

const char* type_name(ColumnType t)
{
    switch (t)
    {
    case ColumnType::String: return "string";
    case ColumnType::Integer: return "integer";
    case ColumnType::Real: return "real";
    case ColumnType::Boolean: return "boolean";
    }
    return "string";
}

ColumnSpec parse_spec(const json& j)
{
    ColumnSpec c;
    c.name = j.value("name", "");
    c.type = parse_type(j.value("type", "string"));
    c.required = j.value("required", false);
    c.nullable = j.value("nullable", false);
    c.unique = j.value("unique", false);
    if (j.contains("min"))
        c.min = j["min"].get<double>();
    if (j.contains("max"))
        c.max = j["max"].get<double>();
    return c;
}

json spec_json(const ColumnSpec& c, bool with_name)
{
    json j;
    if (with_name)
        j["name"] = c.name;
    j["type"] = type_name(c.type);
    j["required"] = c.required;
    if (c.nullable)
        j["nullable"] = true;
    if (c.unique)
        j["unique"] = true;
    if (c.min)
        j["min"] = *c.min;
    if (c.max)
        j["max"] = *c.max;
    return j;
}

// Returns an error message, or empty when the cell conforms.
std::string check_cell(const std::string& cell, const ColumnSpec& spec)
{
    if (cell.empty())
    {
        if (spec.nullable || spec.type == ColumnType::String)
            return {};
        return "null value in non-nullable column";
    }
    double numeric = 0.0;
    switch (spec.type)
    {
    case ColumnType::String:
        return {};
    case ColumnType::Boolean:
    {
        bool b;
        if (!parse_bool(cell, b))
            return "not a boolean: '" + cell + "'";
        return {};
    }
    case ColumnType::Integer:
    {
        long long v = 0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size())
            return "not an integer: '" + cell + "'";
        numeric = static_cast<double>(v);
        break;
    }
    case ColumnType::Real:
    {
        char* end = nullptr;
        numeric = std::strtod(cell.c_str(), &end);
        if (end != cell.c_str() + cell.size() || !std::isfinite(numeric))
            return "not a finite real: '" + cell + "'";
        break;
    }
    }
    if (spec.min && numeric < *spec.min)
        return "value " + cell + " below minimum " + format_full(*spec.min);
    if (spec.max && numeric > *spec.max)
        return "value " + cell + " above maximum " + format_full(*spec.max);
    return {};
}

} // namespace

bool parse_bool(const std::string& text, bool& out)
{
    if (text == "true" || text == "True" || text == "TRUE" || text == "1")
    {
        out = true;
        return true;
    }
    if (text == "false" || text == "False" || text == "FALSE" || text == "0")
    {
        out = false;
        return true;
    }
    return false;
}

std::string ColumnGroup::member_name(int i) const
{
    std::string digits = std::to_string(i);
    while (static_cast<int>(digits.size()) < width)
        digits.insert(digits.begin(), '0');
    return prefix + digits;
}

Manifest Manifest::parse(const std::string& json_text)
{
    json j;
    try
    {
        j = json::parse(json_text);
    }
    catch (const json::exception& e)
    {
        fail(ErrorKind::SchemaError, std::string("manifest is not valid JSON: ") + e.what());
    }
    Manifest m;
    m.name = j.value("name", "");
    m.version = j.value("version", 1);
    for (const auto& c : j.value("columns", json::array()))
        m.columns.push_back(parse_spec(c));
    for (const auto& g : j.value("groups", json::array()))
    {
        ColumnGroup group;
        group.prefix = g.at("prefix").get<std::string>();
        group.count = g.at("count").get<int>();
        group.width = g.value("width", 3);
        group.member = parse_spec(g);
        m.groups.push_back(group);
    }
    return m;
}

Manifest Manifest::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::IoError, "cannot open schema manifest '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

Manifest Manifest::canonical()
{
    Manifest m;
    m.name = "canonical-posts";
    m.version = 1;
    auto col = [&](std::string name, ColumnType t, bool required) -> ColumnSpec& {
        ColumnSpec c;
        c.name = std::move(name);
        c.type = t;
        c.required = required;
        m.columns.push_back(c);
        return m.columns.back();
    };
    col("post_id", ColumnType::String, true).unique = true;
    col("subreddit", ColumnType::String, true);
    col("author_id", ColumnType::String, true);
    col("created_utc", ColumnType::Integer, true);
    col("title", ColumnType::String, true);
    col("body", ColumnType::String, true);
    col("score", ColumnType::Integer, true);
    col("n_awards", ColumnType::Integer, true).min = 0.0;
    col("n_gold", ColumnType::Integer, true).min = 0.0;
    col("removed", ColumnType::Boolean, true);
    col("author_created_utc", ColumnType::Integer, false).nullable = true;
    {
        auto& c = col("toxicity", ColumnType::Real, false);
        c.nullable = true;
        c.min = 0.0;
        c.max = 1.0;
    }
    {
        auto& c = col("sentiment", ColumnType::Real, false);
        c.nullable = true;
        c.min = -1.0;
        c.max = 1.0;
    }
    for (const char* name : {"politeness", "prosocial_support", "prosocial_agreement", "prosocial_politeness"})
        col(name, ColumnType::Real, false).nullable = true;
    ColumnGroup emb;
    emb.prefix = "emb_";
    emb.count = 384;
    emb.width = 3;
    emb.member.type = ColumnType::Real;
    emb.member.nullable = true;
    m.groups.push_back(emb);
    return m;
}

std::string Manifest::to_json() const
{
    json j;
    j["name"] = name;
    j["version"] = version;
    j["columns"] = json::array();
    for (const auto& c : columns)
        j["columns"].push_back(spec_json(c, true));
    j["groups"] = json::array();
    for (const auto& g : groups)
    {
        json gj = spec_json(g.member, false);
        gj["prefix"] = g.prefix;
        gj["count"] = g.count;
        gj["width"] = g.width;
        j["groups"].push_back(gj);
    }
    return j.dump(2) + "\n";
}

std::string ValidationReport::to_json() const
{
    json j;
    j["ok"] = ok();
    j["rows"] = rows;
    j["issues"] = json::array();
    for (const auto& issue : issues)
    {
        json ij;
        ij["row"] = issue.row ? json(*issue.row) : json(nullptr);
        ij["column"] = issue.column;
        ij["message"] = issue.message;
        j["issues"].push_back(ij);
    }
    return j.dump(2) + "\n";
}

ValidationReport validate(const csv::Table& table, const Manifest& manifest, std::size_t max_issues)
{
    ValidationReport report;
    report.rows = table.rows.size();
    auto add = [&](std::optional<std::size_t> row, const std::string& column, const std::string& msg) {
        if (report.issues.size() < max_issues)
            report.issues.push_back({row, column, msg});
    };

    std::set<std::string> seen;
    for (const auto& h : table.header)
        if (!seen.insert(h).second)
            add(std::nullopt, h, "duplicate column");

    std::vector<std::pair<std::size_t, const ColumnSpec*>> checks;
    for (const auto& spec : manifest.columns)
    {
        auto idx = table.column(spec.name);
        if (!idx)
        {
            if (spec.required)
                add(std::nullopt, spec.name, "missing required column");
            continue;
        }
        checks.emplace_back(*idx, &spec);
    }
    for (const auto& group : manifest.groups)
    {
        std::vector<std::string> missing;
        std::vector<std::size_t> present;
        for (int i = 0; i < group.count; ++i)
        {
            const auto name = group.member_name(i);
            if (auto idx = table.column(name))
                present.push_back(*idx);
            else
                missing.push_back(name);
        }
        if (!present.empty() && !missing.empty())
            for (const auto& name : missing)
                add(std::nullopt, name, "missing column from group '" + group.prefix + "'");
        else if (present.empty() && group.member.required)
            add(std::nullopt, group.prefix + "*", "missing required column group");
        for (auto idx : present)
            checks.emplace_back(idx, &group.member);
    }

    for (const auto& [idx, spec] : checks)
    {
        std::unordered_set<std::string> values;
        const std::string& column = table.header[idx];
        for (std::size_t r = 0; r < table.rows.size(); ++r)
        {
            const std::string& cell = table.rows[r][idx];
            if (auto msg = check_cell(cell, *spec); !msg.empty())
                add(r + 1, column, msg);
            if (spec->unique && !values.insert(cell).second)
                add(r + 1, column, "duplicate value '" + cell + "'");
        }
    }
    return report;
}

} // namespace approval::schema
