#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <unordered_map>
#include <vector>

#include "tncn/types.hpp"

namespace tncn {

/// Per-node bounded history of the most recent interactions.
///
/// Every non-self-loop event is recorded under both endpoints; each node keeps
/// at most `k_recent` entries, evicted oldest-first. An event stays *visible*
/// while at least one endpoint still retains it, and the pair frequency
/// q(u,v) counts visible events between u and v (symmetric). The frequency
/// index is what the CN extractor reads; the per-node entry lists feed
/// neighbor sampling for the embedding layer.
///
/// Single-writer contract: one writer advances the frontier via update();
/// concurrent read-only queries are safe between updates.
class NeighborDictionary {
public:
    struct Entry {
        NodeId neighbor;
        Timestamp t;
        EventIdx edge_ref;
    };

    /// k_recent = 0 means unlimited retention.
    explicit NeighborDictionary(NodeId node_count, std::size_t k_recent)
        : k_recent_(k_recent), lists_(static_cast<std::size_t>(node_count)),
          adj_(static_cast<std::size_t>(node_count)) {}

    std::size_t k_recent() const { return k_recent_; }
    NodeId node_count() const { return static_cast<NodeId>(lists_.size()); }
    Timestamp frontier() const { return frontier_; }

    /// Appends a batch of events. Self-loops are skipped (they never enter
    /// neighborhoods). Throws CausalityError if the batch starts before the
    /// current frontier.
    void update(const std::vector<Event>& batch);
    void update_one(const Event& e);

    /// Newest-first list of at most n entries for u. Unknown node -> empty.
    std::vector<Entry> recent_neighbors(NodeId u, std::size_t n) const;

    /// Visible interaction frequency between u and v.
    std::int64_t q(NodeId u, NodeId v) const;

    /// Visible neighbors of u with frequencies, ordered by node id.
    const std::map<NodeId, std::int64_t>& visible_neighbors(NodeId u) const {
        if (u < 0 || static_cast<std::size_t>(u) >= adj_.size()) return empty_adj_;
        return adj_[static_cast<std::size_t>(u)];
    }

    /// Number of distinct visible neighbors (heuristics' degree d(u)).
    std::size_t degree(NodeId u) const { return visible_neighbors(u).size(); }

    const std::deque<Entry>& entries(NodeId u) const {
        static const std::deque<Entry> kEmpty;
        if (u < 0 || static_cast<std::size_t>(u) >= lists_.size()) return kEmpty;
        return lists_[static_cast<std::size_t>(u)];
    }

private:
    void evict_oldest(NodeId u);
    void drop_visibility(EventIdx e, NodeId a, NodeId b);

    std::size_t k_recent_;
    Timestamp frontier_ = 0;
    bool any_event_ = false;
    std::vector<std::deque<Entry>> lists_;
    std::vector<std::map<NodeId, std::int64_t>> adj_;
    std::unordered_map<EventIdx, std::uint8_t> refcount_;
    static const std::map<NodeId, std::int64_t> empty_adj_;
};

} // namespace tncn
