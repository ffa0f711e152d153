#include "tncn/bench.hpp"

#include <algorithm>
#include <chrono>

#include "tncn/cn_extractor.hpp"
#include "tncn/neighbor_dictionary.hpp"

namespace tncn {

namespace {

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::size_t extract_all_hops(const AdjacencyPowers& powers, const BatchIndex& index,
                             const RunConfig& cfg, NodeId u, NodeId v) {
    std::size_t touched = 0;
    for (const auto& [i, j] : cfg.hop_order) {
        CnVector cv = cfg.cn_correction ? corrected_cn(powers, index, u, v, i, j)
                                        : raw_cn(powers, index, u, v, i, j);
        touched += cv.entries.size();
    }
    return touched;
}

} // namespace

nlohmann::json bench_report(const EventLog& log, const RunConfig& config,
                            std::size_t max_batches) {
    nlohmann::json rep;
    rep["events"] = log.size();

    double t0 = now_s();
    NeighborDictionary dict(log.node_count, config.k_recent);
    dict.update(log.events);
    double dict_s = now_s() - t0;
    rep["dict_build_s"] = dict_s;
    rep["events_per_s"] = dict_s > 0 ? static_cast<double>(log.size()) / dict_s : 0.0;

    // Pair workload: consecutive events from the tail of the log.
    const std::size_t bs = config.batch_size;
    std::vector<std::vector<std::pair<NodeId, NodeId>>> batches;
    std::vector<std::pair<NodeId, NodeId>> cur;
    for (std::size_t i = log.size() >= 20000 ? log.size() - 20000 : 0; i < log.size(); ++i) {
        cur.emplace_back(log.events[i].src, log.events[i].dst);
        if (cur.size() == bs) {
            batches.push_back(std::move(cur));
            cur.clear();
            if (max_batches > 0 && batches.size() >= max_batches) break;
        }
    }
    if (!cur.empty() && (max_batches == 0 || batches.size() < max_batches)) {
        batches.push_back(std::move(cur));
    }

    std::size_t pairs = 0, sink = 0;
    double t1 = now_s();
    for (const auto& batch : batches) {
        auto [index, adj] = build_local_adjacency(dict, batch, config.k_hop_max);
        AdjacencyPowers powers = khop_powers(adj, config.k_hop_max);
        for (const auto& [u, v] : batch) {
            sink += extract_all_hops(powers, index, config, u, v);
        }
        pairs += batch.size();
    }
    double batch_s = now_s() - t1;

    double t2 = now_s();
    std::size_t naive_sink = 0;
    for (const auto& batch : batches) {
        for (const auto& [u, v] : batch) {
            auto [index, adj] = build_local_adjacency(dict, {{u, v}}, config.k_hop_max);
            AdjacencyPowers powers = khop_powers(adj, config.k_hop_max);
            naive_sink += extract_all_hops(powers, index, config, u, v);
        }
    }
    double naive_s = now_s() - t2;

    double batch_rate = batch_s > 0 ? static_cast<double>(pairs) / batch_s : 0.0;
    double naive_rate = naive_s > 0 ? static_cast<double>(pairs) / naive_s : 0.0;
    rep["cn_pairs"] = pairs;
    rep["cn_weight_sum_check"] = sink == naive_sink;
    rep["batch"] = {{"wall_s", batch_s}, {"pairs_per_s", batch_rate}};
    rep["naive"] = {{"wall_s", naive_s}, {"pairs_per_s", naive_rate}};
    rep["speedup"] = naive_rate > 0 ? batch_rate / naive_rate : 0.0;
    return rep;
}

} // namespace tncn
