#ifndef APPROVAL_ADAPTER_HPP
#define APPROVAL_ADAPTER_HPP

#include "approval/csv.hpp"
#include "approval/schema.hpp"

#include <string>
#include <vector>

namespace approval::adapter
{

/// Sidecar written by the neural-feature extractor next to the canonical CSV.
struct AdapterManifest
{
    struct Scorer
    {
        std::string column;  // "embedding", "toxicity", ...
        std::string model;
        std::string version;
        int batch_size = 0;
        bool skipped = false; // model failed to load; its columns are null
    };

    std::vector<Scorer> scorers;
    int embedding_dim = 384;
    std::size_t rows_in = 0;
    std::size_t rows_out = 0;
    std::vector<std::string> flagged_rows; // post_ids with empty text

    static AdapterManifest parse(const std::string& json_text);
    static AdapterManifest load(const std::string& path);
    std::string to_json() const;
};

/// Manifest invariants plus its agreement with the emitted table: dimension 384,
/// rows in == rows out == table rows, unique post_id, and every schema check.
schema::ValidationReport check_adapter_output(const csv::Table& table, const AdapterManifest& manifest,
                                              const schema::Manifest& schema = schema::Manifest::canonical());

} // namespace approval::adapter

#endif // APPROVAL_ADAPTER_HPP
