#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tncn/types.hpp"

namespace tncn {

/// One parsed input record prior to id densification.
struct RawRecord {
    std::string src;
    std::string dst;
    Timestamp t = 0;
    std::vector<double> feat;
};

/// Builds an EventLog from ordered records. Node ids are densified to
/// 0..node_count-1 in order of first appearance (sources before destinations
/// within a row). Throws CausalityError on a non-monotone timestamp (the
/// message names the offending row) and SchemaError on a ragged feature row.
EventLog ingest(const std::vector<RawRecord>& rows);

/// CSV with header `src,dst,t[,f0..fD]`. Row numbers in errors are 1-based
/// data rows. An empty file yields an empty log.
EventLog ingest_csv_file(const std::filesystem::path& path);
EventLog ingest_csv_text(const std::string& text);

/// Two-column id map `raw_id,dense_id`, one row per node in dense order.
std::string id_map_csv(const EventLog& log);
void write_id_map(const EventLog& log, const std::filesystem::path& path);
std::vector<std::string> read_id_map(const std::filesystem::path& path);

/// Serializes the log back to the ingestion CSV schema.
std::string event_log_csv(const EventLog& log);

/// Split manifest JSON: {"train":{"begin":..,"end":..}, "val":.., "test":..}.
std::string split_manifest_json(const SplitRanges& s);
SplitRanges read_split_manifest(const std::filesystem::path& path);
SplitRanges chronological_split(EventIdx n, double train_frac, double val_frac);

/// Fraction of test events whose (src,dst) pair never occurs in train.
/// Throws DataError when the test log is empty.
double surprise_index(const EventLog& train, const EventLog& test);
double surprise_index(const EventLog& log, const RowRange& train, const RowRange& test);

/// Sub-view copy of [range.begin, range.end).
EventLog slice(const EventLog& log, const RowRange& range);

DatasetStats dataset_stats(const EventLog& log, const SplitRanges& splits);

} // namespace tncn
