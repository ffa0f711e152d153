#include "tncn/cn_oracle.hpp"

#include <algorithm>
#include <set>
#include <vector>

#include "tncn/errors.hpp"

namespace tncn {

namespace {

// Visible multigraph at time t: adjacency with frequencies, built without any
// extractor machinery.
std::vector<std::map<NodeId, std::int64_t>> visible_graph(const EventLog& log, Timestamp t,
                                                          std::size_t k_recent) {
    std::size_t n = static_cast<std::size_t>(log.node_count);
    // Per-node incident events before t, in log order (chronological, ties by
    // event index).
    std::vector<std::vector<EventIdx>> incident(n);
    for (const Event& e : log.events) {
        if (!(e.t < t)) break; // log is time-sorted
        if (e.src == e.dst) continue;
        incident[static_cast<std::size_t>(e.src)].push_back(e.event_idx);
        incident[static_cast<std::size_t>(e.dst)].push_back(e.event_idx);
    }
    std::set<EventIdx> visible;
    for (const auto& list : incident) {
        std::size_t keep = (k_recent == 0) ? list.size() : std::min(k_recent, list.size());
        for (std::size_t i = list.size() - keep; i < list.size(); ++i) visible.insert(list[i]);
    }
    std::vector<std::map<NodeId, std::int64_t>> adj(n);
    for (EventIdx e : visible) {
        const Event& ev = log.events[static_cast<std::size_t>(e)];
        adj[static_cast<std::size_t>(ev.src)][ev.dst] += 1;
        adj[static_cast<std::size_t>(ev.dst)][ev.src] += 1;
    }
    return adj;
}

// Weighted count of simple paths s -> x of the given length whose
// intermediates avoid `forbidden` (which also contains s and x).
std::int64_t path_count(const std::vector<std::map<NodeId, std::int64_t>>& adj,
                        NodeId s, NodeId x, int length, const std::set<NodeId>& forbidden) {
    if (length == 0) return s == x ? 1 : 0;
    auto edge = [&](NodeId a, NodeId b) -> std::int64_t {
        const auto& m = adj[static_cast<std::size_t>(a)];
        auto it = m.find(b);
        return it == m.end() ? 0 : it->second;
    };
    if (length == 1) return s == x ? 0 : edge(s, x);
    if (length == 2) {
        if (s == x) return 0;
        std::int64_t total = 0;
        for (const auto& [w, q_sw] : adj[static_cast<std::size_t>(s)]) {
            if (forbidden.count(w)) continue;
            total += q_sw * edge(w, x);
        }
        return total;
    }
    throw UsageError("oracle path enumeration implemented for lengths 0..2");
}

} // namespace

std::map<NodeId, std::int64_t> cn_oracle(const EventLog& log, NodeId u, NodeId v,
                                         int hop_u, int hop_v, Timestamp t,
                                         std::size_t k_recent) {
    if (hop_u < 0 || hop_v < 0 || hop_u > 2 || hop_v > 2) {
        throw UsageError("oracle hops must lie in 0..2");
    }
    auto adj = visible_graph(log, t, k_recent);
    std::map<NodeId, std::int64_t> out;

    auto weigh = [&](NodeId x) {
        std::set<NodeId> forbidden{u, v, x};
        std::int64_t wu = path_count(adj, u, x, hop_u, forbidden);
        if (wu == 0) return;
        std::int64_t wv = path_count(adj, v, x, hop_v, forbidden);
        if (wv == 0) return;
        out[x] = wu * wv;
    };

    if (hop_u == 0 && hop_v == 0) {
        if (u == v) out[u] = 1;
        return out;
    }
    if (hop_u == 0) {
        weigh(u);
        return out;
    }
    if (hop_v == 0) {
        weigh(v);
        return out;
    }
    for (NodeId x = 0; x < log.node_count; ++x) {
        if (x == u || x == v) continue;
        weigh(x);
    }
    return out;
}

} // namespace tncn
