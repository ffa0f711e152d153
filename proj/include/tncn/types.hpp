#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tncn {

using NodeId = std::int32_t;
using Timestamp = double;   // dataset units, integer or real valued
using EventIdx = std::int64_t;

/// One timestamped directed interaction. Edge features (if any) live in the
/// owning EventLog's flat feature buffer.
struct Event {
    NodeId src = 0;
    NodeId dst = 0;
    Timestamp t = 0;
    EventIdx event_idx = 0;
};

/// Chronologically ordered interaction log with densified node ids.
struct EventLog {
    std::vector<Event> events;
    std::vector<double> features;     // events.size() * feat_dim, row-major
    std::size_t feat_dim = 0;
    NodeId node_count = 0;
    std::vector<std::string> raw_ids; // dense id -> raw id, from ingestion

    std::size_t size() const { return events.size(); }
    bool empty() const { return events.empty(); }

    std::span<const double> feat(EventIdx i) const {
        if (feat_dim == 0) return {};
        return {features.data() + static_cast<std::size_t>(i) * feat_dim, feat_dim};
    }
};

/// Half-open [begin, end) row range into an EventLog.
struct RowRange {
    EventIdx begin = 0;
    EventIdx end = 0;
    EventIdx size() const { return end - begin; }
};

struct SplitRanges {
    RowRange train;
    RowRange val;
    RowRange test;
};

struct DatasetStats {
    double surprise = 0.0;      // in [0,1]
    NodeId node_count = 0;
    EventIdx edge_count = 0;    // number of events
    std::size_t unique_steps = 0;
    bool is_bipartite = false;
};

} // namespace tncn
