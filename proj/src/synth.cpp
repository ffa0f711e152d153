#include "tncn/synth.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "tncn/errors.hpp"
#include "tncn/event_store.hpp"
#include "tncn/io_util.hpp"
#include "tncn/neighbor_dictionary.hpp"

namespace tncn {

namespace {

void push_event(EventLog& log, NodeId src, NodeId dst, Timestamp t) {
    Event e;
    e.src = src;
    e.dst = dst;
    e.t = t;
    e.event_idx = static_cast<EventIdx>(log.events.size());
    log.events.push_back(e);
}

void finish_log(EventLog& log, NodeId nodes) {
    log.node_count = nodes;
    log.feat_dim = 0;
    log.raw_ids.reserve(static_cast<std::size_t>(nodes));
    for (NodeId i = 0; i < nodes; ++i) log.raw_ids.push_back(std::to_string(i));
}

std::vector<NodeId> sorted_keys(const std::map<NodeId, std::int64_t>& m) {
    std::vector<NodeId> out;
    out.reserve(m.size());
    for (const auto& [k, v] : m) {
        (void)v;
        out.push_back(k);
    }
    return out;
}

/// Does (u, y) currently have a (1,2)- or (2,1)-hop CN in the window graph?
bool has_wedge_cn(const NeighborDictionary& dict, NodeId u, NodeId y) {
    // (1,2): x adjacent to u with a 2-path y-w-x, w != u.
    for (const auto& [x, qux] : dict.visible_neighbors(u)) {
        (void)qux;
        if (x == y) continue;
        for (const auto& [w, qyw] : dict.visible_neighbors(y)) {
            (void)qyw;
            if (w == u || w == x) continue;
            if (dict.q(w, x) > 0) return true;
        }
    }
    // (2,1): c adjacent to y with a 2-path u-x-c, x != y.
    for (const auto& [c, qyc] : dict.visible_neighbors(y)) {
        (void)qyc;
        if (c == u) continue;
        for (const auto& [x, qux] : dict.visible_neighbors(u)) {
            (void)qux;
            if (x == y || x == c) continue;
            if (dict.q(x, c) > 0) return true;
        }
    }
    return false;
}

EventLog synth_bipartite_triadic(const SynthParams& p) {
    if (p.nodes < 10) throw UsageError("bipartite-triadic needs at least 10 nodes");
    NodeId n_users = std::max<NodeId>(2, static_cast<NodeId>(p.nodes * p.user_frac));
    NodeId n_items = p.nodes - n_users;
    if (n_items < 2) throw UsageError("bipartite-triadic needs at least 2 items");
    EventIdx shuffle_every = p.shuffle_every > 0
                                 ? p.shuffle_every
                                 : std::max<EventIdx>(400, p.events / 8);

    std::mt19937_64 rng(p.seed);
    NeighborDictionary window(p.nodes, p.k_window);
    EventLog log;
    std::set<std::pair<NodeId, NodeId>> seen;

    // Every item belongs to one user's pool and every user courts exactly one
    // partner pool at a time. Closures land inside the current partner pool
    // through a visible wedge u-x, w-x, w-y, so a user's wedge-reachable item
    // set stays a few pools wide and uniform negatives rarely hit it. Pools
    // and partners drift so nothing is memorizable for long.
    std::vector<NodeId> owner(static_cast<std::size_t>(p.nodes), 0);
    std::vector<std::vector<NodeId>> pool(static_cast<std::size_t>(n_users));
    std::vector<NodeId> partner(static_cast<std::size_t>(n_users), 0);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    auto uniform_user = [&]() { return static_cast<NodeId>(pick(static_cast<std::size_t>(n_users))); };
    auto uniform_item = [&]() {
        return static_cast<NodeId>(n_users + static_cast<NodeId>(pick(static_cast<std::size_t>(n_items))));
    };
    auto redraw_partner = [&](NodeId u) {
        NodeId w = static_cast<NodeId>(pick(static_cast<std::size_t>(n_users - 1)));
        if (w >= u) ++w;
        partner[static_cast<std::size_t>(u)] = w;
    };
    auto reshuffle = [&]() {
        for (auto& v : pool) v.clear();
        for (NodeId it = n_users; it < p.nodes; ++it) {
            NodeId u = uniform_user();
            owner[static_cast<std::size_t>(it)] = u;
            pool[static_cast<std::size_t>(u)].push_back(it);
        }
    };
    reshuffle();
    for (NodeId u = 0; u < n_users; ++u) redraw_partner(u);
    const EventIdx partner_every = std::max<EventIdx>(50, p.events / 200);

    const double rest = std::max(0.0, 1.0 - p.p_closure - p.p_repeat);
    const double p_own = 0.6 * rest;
    // remainder: bridge into the partner pool

    EventIdx cn_hits = 0, cn_total = 0;
    EventIdx test_begin = p.events - p.events * 15 / 100;

    for (EventIdx step = 1; step <= p.events; ++step) {
        if (step % shuffle_every == 0) reshuffle();
        if (step % partner_every == 0) redraw_partner(uniform_user());
        double roll = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        NodeId src = -1, dst = -1;

        if (roll < p.p_closure) {
            // Close a visible wedge u-x, w-x, w-y with w = partner(u) and y
            // in w's own pool.
            for (int attempt = 0; attempt < 30 && src < 0; ++attempt) {
                NodeId u = uniform_user();
                NodeId w = partner[static_cast<std::size_t>(u)];
                std::vector<NodeId> anchors;
                for (NodeId x : sorted_keys(window.visible_neighbors(u))) {
                    if (window.q(w, x) > 0) anchors.push_back(x);
                }
                if (anchors.empty()) continue;
                NodeId x = anchors[pick(anchors.size())];
                std::vector<NodeId> novel, fresh, any;
                for (NodeId y : pool[static_cast<std::size_t>(w)]) {
                    if (y == x || window.q(w, y) == 0) continue; // wedge leg w-y must be alive
                    any.push_back(y);
                    if (window.q(u, y) == 0) {
                        fresh.push_back(y);
                        if (!seen.count({u, y})) novel.push_back(y);
                    }
                }
                const auto& cands = !novel.empty() ? novel : (!fresh.empty() ? fresh : any);
                if (cands.empty()) continue;
                src = u;
                dst = cands[pick(cands.size())];
            }
            if (src < 0) {
                // No wedge alive: court the partner pool to seed one.
                NodeId u = uniform_user();
                const auto& pw = pool[static_cast<std::size_t>(partner[static_cast<std::size_t>(u)])];
                src = u;
                dst = pw.empty() ? uniform_item() : pw[pick(pw.size())];
            }
        } else if (roll < p.p_closure + p.p_repeat) {
            // Re-touch a recently visible pair.
            for (int attempt = 0; attempt < 60 && src < 0; ++attempt) {
                NodeId u = uniform_user();
                auto items = sorted_keys(window.visible_neighbors(u));
                if (items.empty()) continue;
                src = u;
                dst = items[pick(items.size())];
            }
            if (src < 0) {
                src = uniform_user();
                dst = uniform_item();
            }
        } else if (roll < p.p_closure + p.p_repeat + p_own) {
            // Tend the own pool; keeps wedge legs w-y alive.
            NodeId u = uniform_user();
            const auto& pu = pool[static_cast<std::size_t>(u)];
            src = u;
            dst = pu.empty() ? uniform_item() : pu[pick(pu.size())];
        } else {
            // Bridge: touch one item of the partner pool.
            NodeId u = uniform_user();
            const auto& pw = pool[static_cast<std::size_t>(partner[static_cast<std::size_t>(u)])];
            src = u;
            dst = pw.empty() ? uniform_item() : pw[pick(pw.size())];
        }

        if (static_cast<EventIdx>(log.events.size()) >= test_begin) {
            ++cn_total;
            if (has_wedge_cn(window, src, dst)) ++cn_hits;
        }
        seen.insert({src, dst});
        push_event(log, src, dst, static_cast<Timestamp>(step));
        window.update_one(log.events.back());
    }

    if (cn_total > 0) {
        double frac = static_cast<double>(cn_hits) / static_cast<double>(cn_total);
        if (frac < p.min_test_cn_fraction) {
            throw DataError("bipartite-triadic generation produced only " + std::to_string(frac) +
                            " test-range wedge coverage (need " +
                            std::to_string(p.min_test_cn_fraction) + "); adjust parameters");
        }
    }
    finish_log(log, p.nodes);
    return log;
}

EventLog synth_periodic(const SynthParams& p) {
    if (p.nodes < 4) throw UsageError("periodic needs at least 4 nodes");
    NodeId half = p.nodes / 2;
    int n_pairs = std::max(1, std::min<int>(p.period, static_cast<int>(p.events)));
    EventLog log;
    for (EventIdx step = 1; step <= p.events; ++step) {
        int i = static_cast<int>((step - 1) % n_pairs);
        NodeId src = static_cast<NodeId>(i % half);
        NodeId dst = static_cast<NodeId>(half + (i * 7 + 3) % (p.nodes - half));
        push_event(log, src, dst, static_cast<Timestamp>(step));
    }
    finish_log(log, p.nodes);
    return log;
}

EventLog synth_erdos(const SynthParams& p) {
    if (p.nodes < 2) throw UsageError("erdos-temporal needs at least 2 nodes");
    if (p.p < 0.0 || p.p > 1.0) throw UsageError("erdos-temporal p must lie in [0,1]");
    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    EventLog log;
    for (EventIdx step = 1; step <= p.events; ++step) {
        if (coin(rng) >= p.p) continue;
        NodeId src = static_cast<NodeId>(rng() % static_cast<std::uint64_t>(p.nodes));
        NodeId dst = static_cast<NodeId>(rng() % static_cast<std::uint64_t>(p.nodes - 1));
        if (dst >= src) ++dst;
        push_event(log, src, dst, static_cast<Timestamp>(step));
    }
    finish_log(log, p.nodes);
    return log;
}

} // namespace

EventLog synth_generate(const SynthParams& params) {
    if (params.events < 0) throw UsageError("events must be non-negative");
    if (params.kind == "bipartite-triadic") return synth_bipartite_triadic(params);
    if (params.kind == "periodic") return synth_periodic(params);
    if (params.kind == "erdos-temporal") return synth_erdos(params);
    throw UsageError("unknown synthetic kind '" + params.kind + "'");
}

SplitRanges write_dataset(const std::filesystem::path& dir, const EventLog& log) {
    std::filesystem::create_directories(dir);
    SplitRanges splits = chronological_split(static_cast<EventIdx>(log.size()), 0.70, 0.15);
    atomic_write_file(dir / "events.csv", event_log_csv(log));
    write_id_map(log, dir / "id_map.csv");
    atomic_write_file(dir / "split.json", split_manifest_json(splits));
    return splits;
}

} // namespace tncn
