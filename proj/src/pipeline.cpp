#include "tncn/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "tncn/checkpoint.hpp"
#include "tncn/cn_extractor.hpp"
#include "tncn/errors.hpp"
#include "tncn/heuristics.hpp"
#include "tncn/io_util.hpp"

namespace tncn {

namespace {

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a + 0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

} // namespace

int pessimistic_rank(double pos_score, const std::vector<double>& neg_scores) {
    int rank = 1;
    for (double s : neg_scores) {
        if (s >= pos_score) ++rank;
    }
    return rank;
}

double mrr_of_ranks(const std::vector<int>& ranks) {
    if (ranks.empty()) return 0.0;
    double sum = 0.0;
    for (int r : ranks) sum += 1.0 / static_cast<double>(r);
    return sum / static_cast<double>(ranks.size());
}

NegativeSampler::NegativeSampler(std::vector<NodeId> universe, std::uint64_t seed)
    : universe_(std::move(universe)), rng_(seed) {}

std::vector<NodeId> NegativeSampler::sample(NodeId true_dst, std::size_t n) {
    if (universe_.size() < n + 1) {
        throw DataError("negative sampling needs " + std::to_string(n + 1) +
                        " candidates, universe has " + std::to_string(universe_.size()));
    }
    std::vector<NodeId> out;
    out.reserve(n);
    std::uniform_int_distribution<std::size_t> dist(0, universe_.size() - 1);
    while (out.size() < n) {
        NodeId cand = universe_[dist(rng_)];
        if (cand == true_dst) continue;
        if (std::find(out.begin(), out.end(), cand) != out.end()) continue;
        out.push_back(cand);
    }
    return out;
}

bool EarlyStopper::observe(double value, int epoch) {
    if (value > best) {
        best = value;
        best_epoch = epoch;
        since_best = 0;
        return true;
    }
    ++since_best;
    return false;
}

Runner::Runner(const EventLog& log, SplitRanges splits, RunConfig config)
    : log_(log), splits_(splits), config_(std::move(config)),
      dict_(log.node_count, config_.k_recent) {
    config_.validate();
    model_ = std::make_unique<TncnModel>(model_config_from(config_, log.feat_dim), config_.seed);
    model_->reset_state(log_.node_count);

    std::vector<NodeId> dsts;
    dsts.reserve(log_.size());
    for (const Event& e : log_.events) dsts.push_back(e.dst);
    std::sort(dsts.begin(), dsts.end());
    dsts.erase(std::unique(dsts.begin(), dsts.end()), dsts.end());
    dst_universe_ = std::move(dsts);
}

void Runner::reset_state() {
    model_->reset_state(log_.node_count);
    dict_ = NeighborDictionary(log_.node_count, config_.k_recent);
    pending_.clear();
}

Runner::PreparedBatch Runner::prepare_queries(std::span<const Event> batch, std::size_t n_neg,
                                              std::uint64_t stream_seed) {
    PreparedBatch out;
    out.queries.reserve(batch.size() * (1 + n_neg));
    for (const Event& e : batch) {
        TncnModel::Query pos;
        pos.src = e.src;
        pos.dst = e.dst;
        pos.t = e.t;
        pos.label = 1.0;
        out.queries.push_back(std::move(pos));
        // One sampler per event: negative draws do not bleed across events.
        NegativeSampler sampler(dst_universe_,
                                mix_seed(stream_seed, static_cast<std::uint64_t>(e.event_idx)));
        for (NodeId neg : sampler.sample(e.dst, n_neg)) {
            TncnModel::Query q;
            q.src = e.src;
            q.dst = neg;
            q.t = e.t;
            q.label = 0.0;
            out.queries.push_back(std::move(q));
        }
    }
    return out;
}

void Runner::attach_cn_blocks(std::vector<TncnModel::Query>& queries) {
    for (auto& q : queries) q.cn_blocks.assign(config_.hop_order.size(), {});
    if (config_.hop_order.empty() || queries.empty()) return;

    std::vector<std::pair<NodeId, NodeId>> pairs;
    pairs.reserve(queries.size());
    for (const auto& q : queries) pairs.emplace_back(q.src, q.dst);
    auto [index, adj] = build_local_adjacency(dict_, pairs, config_.k_hop_max);
    AdjacencyPowers powers = khop_powers(adj, config_.k_hop_max);

    for (auto& q : queries) {
        for (std::size_t h = 0; h < config_.hop_order.size(); ++h) {
            auto [hi, hj] = config_.hop_order[h];
            CnVector cv = config_.cn_correction
                              ? corrected_cn(powers, index, q.src, q.dst, hi, hj)
                              : raw_cn(powers, index, q.src, q.dst, hi, hj);
            auto& block = q.cn_blocks[h];
            block.reserve(cv.entries.size());
            for (const auto& [local, w] : cv.entries) {
                block.emplace_back(index.global(local), w);
            }
        }
    }
}

EpochStats Runner::train_epoch(int epoch) {
    EpochStats stats;
    model_->set_training(true);
    std::uint64_t stream_seed = mix_seed(config_.seed, 0x7100 + static_cast<std::uint64_t>(epoch));
    std::size_t updates_before = model_->memory_update_count();
    double loss_sum = 0.0;
    std::size_t batches = 0;

    const EventIdx bs = static_cast<EventIdx>(config_.batch_size);
    for (EventIdx b = splits_.train.begin; b < splits_.train.end; b += bs) {
        EventIdx e = std::min(b + bs, splits_.train.end);
        std::span<const Event> batch(log_.events.data() + b, static_cast<std::size_t>(e - b));

        auto prepared = prepare_queries(batch, config_.train_neg, stream_seed);
        // Fold the previous batch in first: predictions see state lagged by
        // exactly one batch, and the fold happens inside the recorded forward
        // so the updater receives gradients.
        model_->apply_events(pending_, log_);
        dict_.update(pending_);
        pending_.assign(batch.begin(), batch.end());

        attach_cn_blocks(prepared.queries);
        auto out = model_->score_queries(prepared.queries, dict_, log_);
        if (!std::isfinite(out.loss)) {
            throw NumericalError("non-finite training loss in epoch " + std::to_string(epoch));
        }
        model_->zero_grads();
        model_->backward();
        model_->adam_step(config_.lr);
        model_->end_batch();

        loss_sum += out.loss;
        ++batches;
    }
    // Flush the lag so the epoch leaves memory/dictionary fully advanced.
    model_->set_training(false);
    model_->apply_events(pending_, log_);
    model_->end_batch();
    dict_.update(pending_);
    pending_.clear();

    stats.mean_loss = batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0;
    stats.events = splits_.train.size();
    stats.memory_updates = model_->memory_update_count() - updates_before;
    return stats;
}

EvalReport Runner::evaluate_stream(const RowRange& range, std::uint64_t tag) {
    EvalReport rep;
    model_->set_training(false);
    std::uint64_t stream_seed = mix_seed(config_.seed, tag);
    std::size_t updates_before = model_->memory_update_count();
    double t0 = now_s();

    const EventIdx bs = static_cast<EventIdx>(config_.batch_size);
    const std::size_t stride = 1 + config_.eval_neg;
    for (EventIdx b = range.begin; b < range.end; b += bs) {
        EventIdx e = std::min(b + bs, range.end);
        std::span<const Event> batch(log_.events.data() + b, static_cast<std::size_t>(e - b));
        auto prepared = prepare_queries(batch, config_.eval_neg, stream_seed);

        auto score_slice = [&](std::size_t pos_begin, std::size_t pos_end) {
            std::vector<TncnModel::Query> slice(
                prepared.queries.begin() + static_cast<std::ptrdiff_t>(pos_begin * stride),
                prepared.queries.begin() + static_cast<std::ptrdiff_t>(pos_end * stride));
            attach_cn_blocks(slice);
            auto out = model_->score_queries(slice, dict_, log_);
            model_->end_batch();
            for (std::size_t p = 0; p + stride <= out.probs.size(); p += stride) {
                double pos = out.probs[p];
                std::vector<double> negs(out.probs.begin() + static_cast<std::ptrdiff_t>(p) + 1,
                                         out.probs.begin() + static_cast<std::ptrdiff_t>(p + stride));
                rep.ranks.push_back(pessimistic_rank(pos, negs));
                rep.pos_scores.push_back(pos);
                if (config_.record_scores) {
                    std::vector<double> all{pos};
                    all.insert(all.end(), negs.begin(), negs.end());
                    rep.all_scores.push_back(std::move(all));
                }
            }
        };

        if (config_.setting == EvalSetting::Official) {
            // Lag-one: the whole batch is scored against end-of-previous-batch
            // state.
            score_slice(0, batch.size());
        } else {
            // ns: same-batch events strictly before the prediction time are
            // visible to the neighborhood structures (not to the memory).
            std::size_t g = 0;
            std::size_t inserted = 0;
            while (g < batch.size()) {
                std::size_t ge = g;
                while (ge < batch.size() && batch[ge].t == batch[g].t) ++ge;
                while (inserted < batch.size() && batch[inserted].t < batch[g].t) {
                    dict_.update_one(batch[inserted]);
                    ++inserted;
                }
                score_slice(g, ge);
                g = ge;
            }
            while (inserted < batch.size()) {
                dict_.update_one(batch[inserted]);
                ++inserted;
            }
        }

        model_->apply_events(batch, log_);
        model_->end_batch();
        if (config_.setting == EvalSetting::Official) dict_.update({batch.begin(), batch.end()});
    }

    rep.wall_s = now_s() - t0;
    rep.events_processed = range.size();
    rep.memory_updates = model_->memory_update_count() - updates_before;
    rep.mrr = mrr_of_ranks(rep.ranks);
    return rep;
}

void Runner::replay_updates(const RowRange& range) {
    model_->set_training(false);
    const EventIdx bs = static_cast<EventIdx>(config_.batch_size);
    for (EventIdx b = range.begin; b < range.end; b += bs) {
        EventIdx e = std::min(b + bs, range.end);
        std::span<const Event> batch(log_.events.data() + b, static_cast<std::size_t>(e - b));
        model_->apply_events(batch, log_);
        model_->end_batch();
        dict_.update({batch.begin(), batch.end()});
    }
}

ExperimentResult run_experiment(const EventLog& log, const SplitRanges& splits,
                                const RunConfig& config, const std::filesystem::path& out_dir,
                                const std::string& id_map_hash) {
    std::filesystem::create_directories(out_dir);
    Runner runner(log, splits, config);
    EarlyStopper stopper{config.patience};
    std::filesystem::path ckpt = out_dir / "checkpoint.bin";

    double train_s = 0.0, val_s = 0.0;
    nlohmann::json history = nlohmann::json::array();
    int epochs_run = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        runner.reset_state();
        double t0 = now_s();
        EpochStats tr = runner.train_epoch(epoch);
        train_s += now_s() - t0;
        EvalReport val = runner.evaluate_stream(splits.val, /*tag=*/1);
        val_s += val.wall_s;
        epochs_run = epoch;
        history.push_back({{"epoch", epoch},
                           {"train_loss", tr.mean_loss},
                           {"val_mrr", val.mrr},
                           {"memory_updates", tr.memory_updates}});
        if (stopper.observe(val.mrr, epoch)) {
            save_checkpoint(ckpt, runner.model(), config, id_map_hash);
        }
        if (stopper.should_stop()) break;
    }

    // Rebuild streaming state under the best parameters, then test.
    auto loaded = load_checkpoint(ckpt);
    runner.swap_model(std::move(loaded.model));
    runner.reset_state();
    double t1 = now_s();
    runner.replay_updates(splits.train);
    runner.replay_updates(splits.val);
    EvalReport test = runner.evaluate_stream(splits.test, /*tag=*/2);
    double test_s = now_s() - t1;

    ExperimentResult res;
    res.val_mrr = stopper.best;
    res.test_mrr = test.mrr;
    res.epochs_run = epochs_run;
    res.checkpoint_path = ckpt;
    res.test_report = test;

    nlohmann::json m;
    m["setting"] = to_string(config.setting);
    m["seed"] = config.seed;
    m["epochs_run"] = epochs_run;
    m["val_mrr"] = res.val_mrr;
    m["test_mrr"] = res.test_mrr;
    m["timings"] = {{"train_s", train_s}, {"val_s", val_s}, {"test_s", test_s}};
    m["counters"] = {{"events", splits.train.size() + splits.val.size() + splits.test.size()},
                     {"memory_updates", test.memory_updates + static_cast<std::size_t>(
                                            splits.train.size() + splits.val.size())}};
    m["config"] = config.to_json();
    m["checkpoint"] = "checkpoint.bin";
    m["id_map_hash"] = id_map_hash;
    m["epoch_history"] = history;
    res.metrics = m;

    atomic_write_file(out_dir / "metrics.json", m.dump(2) + "\n");
    return res;
}

std::string to_string(BaselineKind k) {
    switch (k) {
        case BaselineKind::EdgebankUn: return "edgebank_un";
        case BaselineKind::EdgebankTw: return "edgebank_tw";
        case BaselineKind::Cn: return "cn";
        case BaselineKind::Ra: return "ra";
        case BaselineKind::Aa: return "aa";
    }
    return "?";
}

ExperimentResult run_baseline(const EventLog& log, const SplitRanges& splits,
                              const RunConfig& config, BaselineKind kind, double tw_window) {
    NeighborDictionary dict(log.node_count, config.k_recent);
    EdgeBankMemory bank;
    if (kind == BaselineKind::EdgebankTw) {
        if (tw_window <= 0.0 && splits.train.size() > 0) {
            tw_window = log.events[static_cast<std::size_t>(splits.train.end - 1)].t -
                        log.events[static_cast<std::size_t>(splits.train.begin)].t;
        }
        bank.set_window(tw_window);
    }

    std::vector<NodeId> dsts;
    for (const Event& e : log.events) dsts.push_back(e.dst);
    std::sort(dsts.begin(), dsts.end());
    dsts.erase(std::unique(dsts.begin(), dsts.end()), dsts.end());

    auto score_pair = [&](NodeId u, NodeId v, Timestamp t) -> double {
        switch (kind) {
            case BaselineKind::EdgebankUn: return bank.score(u, v, EdgeBankMode::Unlimited, t);
            case BaselineKind::EdgebankTw: return bank.score(u, v, EdgeBankMode::TimeWindow, t);
            case BaselineKind::Cn: return heuristic_scores(dict, u, v).cn;
            case BaselineKind::Ra: return heuristic_scores(dict, u, v).ra;
            case BaselineKind::Aa: return heuristic_scores(dict, u, v).aa;
        }
        return 0.0;
    };
    auto observe = [&](std::span<const Event> batch) {
        bank.observe({batch.begin(), batch.end()});
        dict.update({batch.begin(), batch.end()});
    };

    auto eval_range = [&](const RowRange& range, std::uint64_t tag) {
        EvalReport rep;
        double start = now_s();
        std::uint64_t stream_seed = mix_seed(config.seed, tag);
        const EventIdx bs = static_cast<EventIdx>(config.batch_size);
        for (EventIdx b = range.begin; b < range.end; b += bs) {
            EventIdx e = std::min(b + bs, range.end);
            std::span<const Event> batch(log.events.data() + b, static_cast<std::size_t>(e - b));
            for (const Event& ev : batch) {
                double pos = score_pair(ev.src, ev.dst, ev.t);
                std::vector<double> negs;
                NegativeSampler sampler(dsts,
                                        mix_seed(stream_seed, static_cast<std::uint64_t>(ev.event_idx)));
                for (NodeId n : sampler.sample(ev.dst, config.eval_neg)) {
                    negs.push_back(score_pair(ev.src, n, ev.t));
                }
                rep.ranks.push_back(pessimistic_rank(pos, negs));
                rep.pos_scores.push_back(pos);
            }
            observe(batch);
        }
        rep.events_processed = range.size();
        rep.mrr = mrr_of_ranks(rep.ranks);
        rep.wall_s = now_s() - start;
        return rep;
    };

    double t0 = now_s();
    const EventIdx bs = static_cast<EventIdx>(config.batch_size);
    for (EventIdx b = splits.train.begin; b < splits.train.end; b += bs) {
        EventIdx e = std::min(b + bs, splits.train.end);
        observe({log.events.data() + b, static_cast<std::size_t>(e - b)});
    }
    double warm_s = now_s() - t0;
    EvalReport val = eval_range(splits.val, 1);
    EvalReport test = eval_range(splits.test, 2);

    ExperimentResult res;
    res.val_mrr = val.mrr;
    res.test_mrr = test.mrr;
    res.epochs_run = 0;
    res.test_report = test;

    nlohmann::json m;
    m["setting"] = "baseline-" + to_string(kind);
    m["seed"] = config.seed;
    m["epochs_run"] = 0;
    m["val_mrr"] = val.mrr;
    m["test_mrr"] = test.mrr;
    m["timings"] = {{"train_s", warm_s}, {"val_s", val.wall_s}, {"test_s", test.wall_s}};
    m["counters"] = {{"events", splits.train.size() + splits.val.size() + splits.test.size()},
                     {"memory_updates", 0}};
    m["config"] = config.to_json();
    if (kind == BaselineKind::EdgebankTw) m["tw_window"] = bank.window();
    res.metrics = m;
    return res;
}

} // namespace tncn
