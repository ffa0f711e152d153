#pragma once

#include <random>
#include <tuple>
#include <vector>

#include "tncn/event_store.hpp"
#include "tncn/neighbor_dictionary.hpp"
#include "tncn/types.hpp"

namespace tncn::testutil {

/// Log from explicit (src, dst, t) triples with identity node ids.
inline EventLog log_from_triples(const std::vector<std::tuple<int, int, double>>& triples,
                                 NodeId node_count = 0) {
    EventLog log;
    NodeId max_id = node_count > 0 ? node_count - 1 : 0;
    for (std::size_t i = 0; i < triples.size(); ++i) {
        const auto& [s, d, t] = triples[i];
        Event e;
        e.src = static_cast<NodeId>(s);
        e.dst = static_cast<NodeId>(d);
        e.t = t;
        e.event_idx = static_cast<EventIdx>(i);
        log.events.push_back(e);
        max_id = std::max({max_id, e.src, e.dst});
    }
    log.node_count = max_id + 1;
    for (NodeId i = 0; i <= max_id; ++i) log.raw_ids.push_back(std::to_string(i));
    return log;
}

/// Random temporal multigraph: `events` interactions over `nodes` nodes with
/// timestamps 1..events (repeated pairs likely at small node counts).
inline EventLog random_log(NodeId nodes, EventIdx events, std::uint64_t seed,
                           bool bipartite = false) {
    std::mt19937_64 rng(seed);
    std::vector<std::tuple<int, int, double>> triples;
    triples.reserve(static_cast<std::size_t>(events));
    NodeId half = nodes / 2;
    for (EventIdx i = 0; i < events; ++i) {
        NodeId src, dst;
        if (bipartite) {
            src = static_cast<NodeId>(rng() % static_cast<std::uint64_t>(half));
            dst = static_cast<NodeId>(half + rng() % static_cast<std::uint64_t>(nodes - half));
        } else {
            src = static_cast<NodeId>(rng() % static_cast<std::uint64_t>(nodes));
            dst = static_cast<NodeId>(rng() % static_cast<std::uint64_t>(nodes - 1));
            if (dst >= src) ++dst;
        }
        triples.emplace_back(src, dst, static_cast<double>(i + 1));
    }
    return log_from_triples(triples, nodes);
}

/// Dictionary replayed over events strictly before t.
inline NeighborDictionary dict_before(const EventLog& log, Timestamp t, std::size_t k_recent) {
    NeighborDictionary dict(log.node_count, k_recent);
    for (const Event& e : log.events) {
        if (!(e.t < t)) break;
        dict.update_one(e);
    }
    return dict;
}

} // namespace tncn::testutil
