#include "tncn/cn_extractor.hpp"

#include <algorithm>

#include "tncn/errors.hpp"

namespace tncn {

int BatchIndex::local(NodeId u) const {
    auto it = forward.find(u);
    if (it == forward.end()) {
        throw DataError("node " + std::to_string(u) + " not in batch index");
    }
    return it->second;
}

std::map<NodeId, std::int64_t> CnVector::to_global(const BatchIndex& index) const {
    std::map<NodeId, std::int64_t> out;
    for (const auto& [local, w] : entries) out[index.global(local)] = w;
    return out;
}

std::pair<BatchIndex, CsrMatrix> build_local_adjacency(
    const NeighborDictionary& dict,
    const std::vector<std::pair<NodeId, NodeId>>& batch_pairs,
    int k_hop_max) {
    BatchIndex index;
    auto add = [&](NodeId g) {
        if (index.forward.emplace(g, index.size()).second) index.inverse.push_back(g);
    };
    for (const auto& [u, v] : batch_pairs) {
        add(u);
        add(v);
    }
    // Expand level by level so every node within k_hop_max hops of an
    // endpoint lands in the universe; rows consumed by the extractors are
    // then complete out to the requested hop.
    std::size_t level_begin = 0;
    for (int hop = 0; hop < k_hop_max; ++hop) {
        std::size_t level_end = index.inverse.size();
        for (std::size_t i = level_begin; i < level_end; ++i) {
            for (const auto& [nbr, q] : dict.visible_neighbors(index.inverse[i])) {
                (void)q;
                add(nbr);
            }
        }
        level_begin = level_end;
    }

    std::vector<std::tuple<int, int, std::int64_t>> triplets;
    for (int i = 0; i < index.size(); ++i) {
        for (const auto& [nbr, q] : dict.visible_neighbors(index.global(i))) {
            auto it = index.forward.find(nbr);
            if (it != index.forward.end()) triplets.emplace_back(i, it->second, q);
        }
    }
    CsrMatrix a = csr_from_triplets(index.size(), std::move(triplets));
    return {std::move(index), std::move(a)};
}

AdjacencyPowers khop_powers(const CsrMatrix& a, int k_hop_max) {
    if (k_hop_max < 0) throw UsageError("k_hop_max must be non-negative");
    if (k_hop_max > 2) {
        throw UsageError("unsupported k_hop_max=" + std::to_string(k_hop_max) +
                         ": exact walk-to-path corrections are only implemented through 2 hops");
    }
    AdjacencyPowers p;
    p.mats.push_back(CsrMatrix::identity(a.n));
    if (k_hop_max >= 1) p.mats.push_back(a);
    for (int k = 2; k <= k_hop_max; ++k) {
        p.mats.push_back(spgemm(p.mats.back(), a));
    }
    return p;
}

namespace {

void check_hop(const AdjacencyPowers& powers, int hop) {
    if (hop < 0 || static_cast<std::size_t>(hop) > powers.max_hop()) {
        throw UsageError("hop " + std::to_string(hop) + " outside built powers (max " +
                         std::to_string(powers.max_hop()) + ")");
    }
}

std::vector<int> reach_support(const AdjacencyPowers& powers, int row, int k) {
    std::vector<int> out;
    for (int l = 0; l <= k; ++l) {
        auto cols = powers[static_cast<std::size_t>(l)].row_cols(row);
        std::vector<int> merged;
        merged.reserve(out.size() + cols.size());
        std::set_union(out.begin(), out.end(), cols.begin(), cols.end(), std::back_inserter(merged));
        out = std::move(merged);
    }
    return out;
}

} // namespace

CnVector raw_cn(const AdjacencyPowers& powers, const BatchIndex& index,
                NodeId u, NodeId v, int hop_u, int hop_v) {
    check_hop(powers, hop_u);
    check_hop(powers, hop_v);
    int lu = index.local(u);
    int lv = index.local(v);
    CnVector out;
    out.hop_u = hop_u;
    out.hop_v = hop_v;
    out.entries = hadamard_rows(powers[static_cast<std::size_t>(hop_u)], lu,
                                powers[static_cast<std::size_t>(hop_v)], lv);
    return out;
}

CnVector exact_hop_cn(const AdjacencyPowers& powers, const BatchIndex& index,
                      NodeId u, NodeId v, int k) {
    if (k == 0) throw UsageError("degenerate hop k=0: use raw_cn with i=j=0");
    check_hop(powers, k);
    int lu = index.local(u);
    int lv = index.local(v);

    auto common = [&](int hop) {
        std::vector<int> cu = reach_support(powers, lu, hop);
        std::vector<int> cv = reach_support(powers, lv, hop);
        std::vector<int> out;
        std::set_intersection(cu.begin(), cu.end(), cv.begin(), cv.end(), std::back_inserter(out));
        return out;
    };
    std::vector<int> within_k = common(k);
    std::vector<int> within_km1 = common(k - 1);

    CnVector out;
    out.hop_u = k;
    out.hop_v = k;
    std::size_t j = 0;
    for (int x : within_k) {
        while (j < within_km1.size() && within_km1[j] < x) ++j;
        bool already = j < within_km1.size() && within_km1[j] == x;
        std::int64_t w = (already ? 0 : 1); // cumulative support is monotone, never negative
        if (w <= 0) continue;
        if (x == lu || x == lv) continue;
        out.entries.emplace_back(x, w);
    }
    return out;
}

CnVector corrected_cn(const AdjacencyPowers& powers, const BatchIndex& index,
                      NodeId u, NodeId v, int hop_u, int hop_v) {
    check_hop(powers, hop_u);
    check_hop(powers, hop_v);
    int lu = index.local(u);
    int lv = index.local(v);
    CnVector out;
    out.hop_u = hop_u;
    out.hop_v = hop_v;

    // One-hop rows and the pair frequency feed every correction term.
    const CsrMatrix& a1 = powers[std::min<std::size_t>(1, powers.max_hop())];
    std::int64_t quv = powers.max_hop() >= 1 ? a1.at(lu, lv) : 0;

    if (hop_u == 0 && hop_v == 0) {
        if (u == v) out.entries.emplace_back(lu, 1);
        return out;
    }
    if (hop_u == 0 || hop_v == 0) {
        // Zero-hop side pins the candidate to that endpoint; the other side's
        // power entry is already a clean path count (no intermediate can
        // collide with u or v there, self-frequencies being zero).
        int cand = hop_u == 0 ? lu : lv;
        int src = hop_u == 0 ? lv : lu;
        int hop = hop_u == 0 ? hop_v : hop_u;
        std::int64_t w = powers[static_cast<std::size_t>(hop)].at(src, cand);
        if (w > 0) out.entries.emplace_back(cand, w);
        return out;
    }

    CnVector raw = raw_cn(powers, index, u, v, hop_u, hop_v);
    const CsrMatrix& a2 = powers.max_hop() >= 2 ? powers[2] : powers[0];
    for (const auto& [x, wraw] : raw.entries) {
        if (x == lu || x == lv) continue;
        std::int64_t side_u, side_v;
        if (hop_u == 1) {
            side_u = a1.at(lu, x);
        } else {
            // 2-walks u->w->x minus the w=v collision; w=u and w=x walks
            // carry a zero self-frequency factor already.
            side_u = a2.at(lu, x) - quv * a1.at(lv, x);
        }
        if (hop_v == 1) {
            side_v = a1.at(lv, x);
        } else {
            side_v = a2.at(lv, x) - quv * a1.at(lu, x);
        }
        std::int64_t w = side_u * side_v;
        if (w > 0) out.entries.emplace_back(x, w);
    }
    return out;
}

CnVector corrected_cn_12(const AdjacencyPowers& powers, const BatchIndex& index,
                         NodeId u, NodeId v) {
    return corrected_cn(powers, index, u, v, 1, 2);
}

CnVector corrected_cn_21(const AdjacencyPowers& powers, const BatchIndex& index,
                         NodeId u, NodeId v) {
    return corrected_cn(powers, index, u, v, 2, 1);
}

CnVector corrected_cn_22(const AdjacencyPowers& powers, const BatchIndex& index,
                         NodeId u, NodeId v) {
    return corrected_cn(powers, index, u, v, 2, 2);
}

} // namespace tncn
