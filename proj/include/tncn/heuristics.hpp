#pragma once

#include <cstdint>
#include <unordered_map>

#include "tncn/neighbor_dictionary.hpp"
#include "tncn/types.hpp"

namespace tncn {

struct HeuristicScores {
    double cn = 0.0;
    double ra = 0.0;
    double aa = 0.0;
    // Common neighbors whose degree made 1/log d(w) degenerate (d = 1); those
    // terms contribute 0 to AA.
    std::int64_t degenerate_degrees = 0;
};

struct HeuristicConfig {
    // Degrees from the retained window by default; full-history degrees need
    // the caller to keep an unbounded dictionary alongside.
    const NeighborDictionary* degree_source = nullptr;
};

/// CN = |N1(u) ∩ N1(v)| over distinct visible neighbors; RA sums 1/d(w);
/// AA sums 1/ln d(w) with d(w) the distinct-neighbor degree.
HeuristicScores heuristic_scores(const NeighborDictionary& dict, NodeId u, NodeId v,
                                 const HeuristicConfig& cfg = {});

enum class EdgeBankMode { Unlimited, TimeWindow };

/// Memorization baseline: scores 1 for previously observed (undirected)
/// pairs, optionally restricted to a trailing time window.
class EdgeBankMemory {
public:
    explicit EdgeBankMemory(double window = 0.0) : window_(window) {}

    void observe(NodeId u, NodeId v, Timestamp t);
    void observe(const std::vector<Event>& batch);

    /// 1.0 if the pair was seen (Unlimited), or seen within `window` of
    /// query_t (TimeWindow); else 0.0.
    double score(NodeId u, NodeId v, EdgeBankMode mode, Timestamp query_t) const;

    double window() const { return window_; }
    void set_window(double w) { window_ = w; }

private:
    static std::uint64_t key(NodeId u, NodeId v);
    std::unordered_map<std::uint64_t, Timestamp> last_seen_;
    double window_;
};

} // namespace tncn
