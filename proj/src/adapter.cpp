#include "approval/adapter.hpp"

#include "approval/common.hpp"
#include "approval/corpus.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace approval::adapter
{

using nlohmann::json;

AdapterManifest AdapterManifest::parse(const std::string& json_text)
{
    AdapterManifest m;
    try
    {
        const json j = json::parse(json_text);
        m.embedding_dim = j.at("embedding_dim").get<int>();
        m.rows_in = j.at("rows_in").get<std::size_t>();
        m.rows_out = j.at("rows_out").get<std::size_t>();
        for (const auto& s : j.value("scorers", json::array()))
            m.scorers.push_back({s.at("column").get<std::string>(), s.value("model", ""), s.value("version", ""),
                                 s.value("batch_size", 0), s.value("skipped", false)});
        m.flagged_rows = j.value("flagged_rows", std::vector<std::string>{});
    }
    catch (const json::exception& e)
    {
        fail(ErrorKind::SchemaError, std::string("adapter manifest: ") + e.what());
    }
    return m;
}

AdapterManifest AdapterManifest::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::IoError, "cannot open adapter manifest '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string AdapterManifest::to_json() const
{
    nlohmann::ordered_json j;
    j["embedding_dim"] = embedding_dim;
    j["rows_in"] = rows_in;
    j["rows_out"] = rows_out;
    j["scorers"] = nlohmann::ordered_json::array();
    for (const auto& s : scorers)
    {
        nlohmann::ordered_json sj;
        sj["column"] = s.column;
        sj["model"] = s.model;
        sj["version"] = s.version;
        sj["batch_size"] = s.batch_size;
        sj["skipped"] = s.skipped;
        j["scorers"].push_back(sj);
    }
    j["flagged_rows"] = flagged_rows;
    return j.dump(2) + "\n";
}

schema::ValidationReport check_adapter_output(const csv::Table& table, const AdapterManifest& manifest,
                                              const schema::Manifest& schema)
{
    auto report = schema::validate(table, schema);
    auto add = [&](const std::string& column, const std::string& msg) {
        report.issues.push_back({std::nullopt, column, msg});
    };
    if (manifest.embedding_dim != corpus::embedding_dim)
        add("embedding_dim", "expected " + std::to_string(corpus::embedding_dim) + ", manifest declares " +
                                 std::to_string(manifest.embedding_dim));
    if (manifest.rows_in != manifest.rows_out)
        add("rows_out", "rows in (" + std::to_string(manifest.rows_in) + ") != rows out (" +
                            std::to_string(manifest.rows_out) + ")");
    if (manifest.rows_out != table.rows.size())
        add("rows_out", "manifest declares " + std::to_string(manifest.rows_out) + " rows, table has " +
                            std::to_string(table.rows.size()));
    return report;
}

} // namespace approval::adapter
