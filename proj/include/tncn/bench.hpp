#pragma once

#include <json.hpp>

#include "tncn/config.hpp"
#include "tncn/types.hpp"

namespace tncn {

/// Phase timings and throughput: dictionary build over the full log, then
/// batched CN extraction (one shared adjacency per batch of pairs) against a
/// naive per-pair route that rebuilds its matrices for every pair.
nlohmann::json bench_report(const EventLog& log, const RunConfig& config,
                            std::size_t max_batches = 0);

} // namespace tncn
