#include "tncn/neighbor_dictionary.hpp"

#include <algorithm>

#include "tncn/errors.hpp"

namespace tncn {

const std::map<NodeId, std::int64_t> NeighborDictionary::empty_adj_;

void NeighborDictionary::update(const std::vector<Event>& batch) {
    for (const Event& e : batch) update_one(e);
}

void NeighborDictionary::update_one(const Event& e) {
    if (any_event_ && e.t < frontier_) {
        throw CausalityError("dictionary update at t=" + std::to_string(e.t) +
                             " regresses behind frontier t=" + std::to_string(frontier_));
    }
    frontier_ = e.t;
    any_event_ = true;
    if (e.src == e.dst) return; // self-loops never enter neighborhoods

    NodeId hi = std::max(e.src, e.dst);
    if (static_cast<std::size_t>(hi) >= lists_.size()) {
        lists_.resize(static_cast<std::size_t>(hi) + 1);
        adj_.resize(static_cast<std::size_t>(hi) + 1);
    }

    lists_[static_cast<std::size_t>(e.src)].push_back({e.dst, e.t, e.event_idx});
    lists_[static_cast<std::size_t>(e.dst)].push_back({e.src, e.t, e.event_idx});
    refcount_[e.event_idx] = 2;
    adj_[static_cast<std::size_t>(e.src)][e.dst] += 1;
    adj_[static_cast<std::size_t>(e.dst)][e.src] += 1;

    if (k_recent_ > 0) {
        evict_oldest(e.src);
        evict_oldest(e.dst);
    }
}

void NeighborDictionary::evict_oldest(NodeId u) {
    auto& list = lists_[static_cast<std::size_t>(u)];
    while (list.size() > k_recent_) {
        Entry oldest = list.front();
        list.pop_front();
        drop_visibility(oldest.edge_ref, u, oldest.neighbor);
    }
}

void NeighborDictionary::drop_visibility(EventIdx e, NodeId a, NodeId b) {
    auto it = refcount_.find(e);
    if (it == refcount_.end()) return;
    if (--it->second > 0) return;
    refcount_.erase(it);
    // Last retaining endpoint dropped the event: the pair frequency decays.
    auto dec = [&](NodeId x, NodeId y) {
        auto& m = adj_[static_cast<std::size_t>(x)];
        auto jt = m.find(y);
        if (jt != m.end() && --jt->second == 0) m.erase(jt);
    };
    dec(a, b);
    dec(b, a);
}

std::vector<NeighborDictionary::Entry> NeighborDictionary::recent_neighbors(NodeId u, std::size_t n) const {
    std::vector<Entry> out;
    if (u < 0 || static_cast<std::size_t>(u) >= lists_.size()) return out;
    const auto& list = lists_[static_cast<std::size_t>(u)];
    std::size_t take = std::min(n, list.size());
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        out.push_back(list[list.size() - 1 - i]);
    }
    return out;
}

std::int64_t NeighborDictionary::q(NodeId u, NodeId v) const {
    if (u < 0 || static_cast<std::size_t>(u) >= adj_.size()) return 0;
    const auto& m = adj_[static_cast<std::size_t>(u)];
    auto it = m.find(v);
    return it == m.end() ? 0 : it->second;
}

} // namespace tncn
