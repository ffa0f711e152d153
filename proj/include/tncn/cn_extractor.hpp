#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tncn/neighbor_dictionary.hpp"
#include "tncn/sparse.hpp"
#include "tncn/types.hpp"

namespace tncn {

/// Bijection between the batch-local node universe and 0..size()-1.
struct BatchIndex {
    std::unordered_map<NodeId, int> forward;
    std::vector<NodeId> inverse;

    int size() const { return static_cast<int>(inverse.size()); }
    bool contains(NodeId u) const { return forward.count(u) > 0; }
    /// Throws DataError when u is outside the universe.
    int local(NodeId u) const;
    NodeId global(int i) const { return inverse[static_cast<std::size_t>(i)]; }
};

/// [A^0 = I, A^1, ..., A^k] with exact integer entries. A carries no
/// self-loops; A^0 supplies them.
struct AdjacencyPowers {
    std::vector<CsrMatrix> mats;
    const CsrMatrix& operator[](std::size_t k) const { return mats[k]; }
    std::size_t max_hop() const { return mats.size() - 1; }
};

/// Sparse CN result over local ids, tagged with its hop pair.
struct CnVector {
    int hop_u = 0;
    int hop_v = 0;
    SparseVec entries; // sorted by local id, weights > 0

    /// Remaps to global node ids.
    std::map<NodeId, std::int64_t> to_global(const BatchIndex& index) const;
};

// Extraction is a pure function of the built index/powers: once
// build_local_adjacency returns, all queries below are read-only and may run
// in parallel across the pairs of a batch.

/// Builds the batch-local universe (both endpoints of every pair plus their
/// visible neighbors out to k_hop_max hops) and the symmetric frequency
/// matrix over it. Lag semantics are the caller's responsibility.
std::pair<BatchIndex, CsrMatrix> build_local_adjacency(
    const NeighborDictionary& dict,
    const std::vector<std::pair<NodeId, NodeId>>& batch_pairs,
    int k_hop_max = 2);

/// [I, A, A*A, ...]. Throws UsageError for k_hop_max > 2: the exact
/// walk-to-path correction formulas are only implemented through 2 hops.
AdjacencyPowers khop_powers(const CsrMatrix& a, int k_hop_max);

/// Uncorrected walk-based result: A^i[id(u)] elementwise A^j[id(v)].
CnVector raw_cn(const AdjacencyPowers& powers, const BatchIndex& index,
                NodeId u, NodeId v, int hop_u, int hop_v);

/// Cumulative-hop route: nodes common to both k-hop reach balls (self-loops
/// added) minus those already common at k-1 hops, with u and v themselves
/// dropped. Weights are membership indicators. Throws UsageError for k = 0.
CnVector exact_hop_cn(const AdjacencyPowers& powers, const BatchIndex& index,
                      NodeId u, NodeId v, int k);

/// Path-exact (i,j)-hop common neighbors: for each candidate x, the number of
/// (length-i path from u, length-j path from v) pairs ending at x whose
/// intermediate nodes avoid u, v and x, weighted by interaction frequencies.
/// Candidates equal to u or v are excluded when both hops are >= 1; zero-hop
/// sides keep the endpoint itself as the only candidate.
CnVector corrected_cn(const AdjacencyPowers& powers, const BatchIndex& index,
                      NodeId u, NodeId v, int hop_u, int hop_v);

CnVector corrected_cn_12(const AdjacencyPowers& powers, const BatchIndex& index,
                         NodeId u, NodeId v);
CnVector corrected_cn_21(const AdjacencyPowers& powers, const BatchIndex& index,
                         NodeId u, NodeId v);
CnVector corrected_cn_22(const AdjacencyPowers& powers, const BatchIndex& index,
                         NodeId u, NodeId v);

} // namespace tncn
