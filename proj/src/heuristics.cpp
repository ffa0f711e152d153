#include "tncn/heuristics.hpp"

#include <algorithm>
#include <cmath>

namespace tncn {

HeuristicScores heuristic_scores(const NeighborDictionary& dict, NodeId u, NodeId v,
                                 const HeuristicConfig& cfg) {
    const NeighborDictionary& deg_src = cfg.degree_source ? *cfg.degree_source : dict;
    HeuristicScores s;
    const auto& nu = dict.visible_neighbors(u);
    const auto& nv = dict.visible_neighbors(v);
    auto iu = nu.begin();
    auto iv = nv.begin();
    while (iu != nu.end() && iv != nv.end()) {
        if (iu->first < iv->first) {
            ++iu;
        } else if (iu->first > iv->first) {
            ++iv;
        } else {
            NodeId w = iu->first;
            double d = static_cast<double>(deg_src.degree(w));
            s.cn += 1.0;
            if (d > 0) s.ra += 1.0 / d;
            if (d > 1.0) {
                s.aa += 1.0 / std::log(d);
            } else {
                s.degenerate_degrees += 1; // log 1 = 0, term contributes nothing
            }
            ++iu;
            ++iv;
        }
    }
    return s;
}

std::uint64_t EdgeBankMemory::key(NodeId u, NodeId v) {
    NodeId a = std::min(u, v);
    NodeId b = std::max(u, v);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(b));
}

void EdgeBankMemory::observe(NodeId u, NodeId v, Timestamp t) {
    Timestamp& slot = last_seen_[key(u, v)];
    slot = std::max(slot, t);
}

void EdgeBankMemory::observe(const std::vector<Event>& batch) {
    for (const Event& e : batch) observe(e.src, e.dst, e.t);
}

double EdgeBankMemory::score(NodeId u, NodeId v, EdgeBankMode mode, Timestamp query_t) const {
    auto it = last_seen_.find(key(u, v));
    if (it == last_seen_.end()) return 0.0;
    if (mode == EdgeBankMode::Unlimited) return 1.0;
    return (query_t - it->second) <= window_ ? 1.0 : 0.0;
}

} // namespace tncn
