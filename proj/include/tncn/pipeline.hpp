#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <json.hpp>

#include "tncn/config.hpp"
#include "tncn/event_store.hpp"
#include "tncn/model.hpp"
#include "tncn/neighbor_dictionary.hpp"
#include "tncn/types.hpp"

namespace tncn {

/// Pessimistic competition rank: the positive is placed below every negative
/// with a score >= its own.
int pessimistic_rank(double pos_score, const std::vector<double>& neg_scores);

double mrr_of_ranks(const std::vector<int>& ranks);

/// Uniform negatives without replacement, excluding the true destination.
class NegativeSampler {
public:
    NegativeSampler(std::vector<NodeId> universe, std::uint64_t seed);
    /// Throws DataError when the universe cannot supply n distinct negatives.
    std::vector<NodeId> sample(NodeId true_dst, std::size_t n);
    std::size_t universe_size() const { return universe_.size(); }

private:
    std::vector<NodeId> universe_;
    std::mt19937_64 rng_;
};

/// Validation-MRR early stopping: stop once `patience` epochs pass without
/// improvement over the best.
struct EarlyStopper {
    int patience = 1;
    double best = -std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    int since_best = 0;

    /// Returns true when `value` improves on the best so far.
    bool observe(double value, int epoch);
    bool should_stop() const { return since_best >= patience; }
};

struct EvalReport {
    double mrr = 0.0;
    std::vector<int> ranks;
    std::vector<double> pos_scores;
    // Per positive: [pos, neg_1..neg_k] scores; filled when record_scores.
    std::vector<std::vector<double>> all_scores;
    double wall_s = 0.0;
    EventIdx events_processed = 0;
    std::size_t memory_updates = 0;
};

struct EpochStats {
    double mean_loss = 0.0;
    EventIdx events = 0;
    std::size_t memory_updates = 0;
};

/// Streaming train/eval driver over one dataset. Owns the model, the neighbor
/// dictionary and the one-batch lag used to keep predictions causally clean:
/// a batch is scored against state from strictly earlier batches, and its own
/// positive events enter memory and dictionary afterwards. The outer loop is
/// batch-serial (temporal order is a hard constraint); scoring within a batch
/// is independent per query.
class Runner {
public:
    Runner(const EventLog& log, SplitRanges splits, RunConfig config);

    /// Clears memory, dictionary and pending events (epoch start).
    void reset_state();

    /// One training pass over the train split. Each positive event updates
    /// the memory exactly once.
    EpochStats train_epoch(int epoch);

    /// Streaming evaluation over a row range: scores each positive against
    /// sampled negatives, then folds the batch into memory/dictionary.
    /// Never records gradients. `tag` seeds the negative stream.
    EvalReport evaluate_stream(const RowRange& range, std::uint64_t tag);

    /// Advances memory/dictionary over a range without scoring.
    void replay_updates(const RowRange& range);

    TncnModel& model() { return *model_; }
    const NeighborDictionary& dict() const { return dict_; }
    const RunConfig& config() const { return config_; }
    void swap_model(std::unique_ptr<TncnModel> m) { model_ = std::move(m); }

private:
    struct PreparedBatch {
        std::vector<TncnModel::Query> queries; // positives each followed by their negatives
    };
    PreparedBatch prepare_queries(std::span<const Event> batch, std::size_t n_neg,
                                  std::uint64_t stream_seed);
    void attach_cn_blocks(std::vector<TncnModel::Query>& queries);

    const EventLog& log_;
    SplitRanges splits_;
    RunConfig config_;
    std::unique_ptr<TncnModel> model_;
    NeighborDictionary dict_;
    std::vector<Event> pending_;
    std::vector<NodeId> dst_universe_;
};

struct ExperimentResult {
    double val_mrr = 0.0;
    double test_mrr = 0.0;
    int epochs_run = 0;
    nlohmann::json metrics;
    std::filesystem::path checkpoint_path;
    EvalReport test_report;
};

/// Full epoch loop with validation early stopping; the best-validation
/// checkpoint is retained and test MRR is reported from it. Writes
/// checkpoint.bin and metrics.json under out_dir.
ExperimentResult run_experiment(const EventLog& log, const SplitRanges& splits,
                                const RunConfig& config, const std::filesystem::path& out_dir,
                                const std::string& id_map_hash);

enum class BaselineKind { EdgebankUn, EdgebankTw, Cn, Ra, Aa };
std::string to_string(BaselineKind k);

/// Non-neural reference scorers evaluated under the same streaming protocol
/// and metrics schema. EdgeBank(tw) window 0 means "training split duration".
ExperimentResult run_baseline(const EventLog& log, const SplitRanges& splits,
                              const RunConfig& config, BaselineKind kind,
                              double tw_window = 0.0);

} // namespace tncn
