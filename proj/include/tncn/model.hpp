#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tncn/attention.hpp"
#include "tncn/gru.hpp"
#include "tncn/matrix.hpp"
#include "tncn/neighbor_dictionary.hpp"
#include "tncn/time_encoding.hpp"
#include "tncn/types.hpp"

namespace tncn {

struct ModelConfig {
    std::size_t mem_dim = 100;
    std::size_t emb_dim = 100;
    std::size_t time_dim = 100;
    std::size_t heads = 2;
    std::size_t head_hidden = 0; // 0 -> emb_dim
    std::size_t num_neighbors = 10;
    std::size_t feat_dim = 0;
    std::vector<std::pair<int, int>> hop_order =
        {{0, 1}, {1, 0}, {1, 1}, {1, 2}, {2, 1}, {2, 2}};
    bool cn_weighted = false;
};

/// Projection head: two-layer MLP to a scalar logit.
struct MlpHead {
    Mat w1;
    Vec b1;
    Mat w2; // 1 x hidden
    Vec b2; // 1

    static MlpHead init(std::size_t in_dim, std::size_t hidden, std::mt19937_64& rng);

    struct Cache {
        Vec in, pre1, h1;
    };
    double forward(const Vec& repr, Cache* cache = nullptr) const;

    struct Grads {
        Mat w1, w2;
        Vec b1, b2;
    };
    Grads make_grads() const;
    Vec backward(const Cache& c, double g_logit, Grads& g) const;
};

/// Sum pooling of CN node embeddings; missing nodes are an error, an empty
/// set yields the zero vector. Weighted mode multiplies by CN multiplicity.
Vec ncn_aggregate(const std::map<NodeId, Vec>& embeddings,
                  const std::map<NodeId, std::int64_t>& cn_nodes,
                  std::size_t emb_dim, bool weighted);

/// [emb_u * emb_v (elementwise) ; blocks...]; every block must be emb_dim
/// wide or a SchemaError is thrown.
Vec pair_representation(const Vec& emb_u, const Vec& emb_v, const std::vector<Vec>& ncn_blocks);

/// sigmoid(MLP(repr)), in (0,1) for finite inputs.
double predict(const MlpHead& head, const Vec& repr);

struct MemorySnapshot {
    std::vector<Vec> mem;
    std::vector<Timestamp> last_update;
};

/// The differentiable TNCN core: per-node memory evolved by a gated updater,
/// attention embeddings over recent neighbors, NCN aggregation per hop pair,
/// and the projection head. One forward pass per batch may be recorded for
/// reverse-mode gradients; memory entering the batch is treated as constant.
class TncnModel {
public:
    struct Query {
        NodeId src = 0;
        NodeId dst = 0;
        Timestamp t = 0;
        double label = 0.0;
        // Parallel to config.hop_order: (global node, weight) per hop pair.
        std::vector<std::vector<std::pair<NodeId, std::int64_t>>> cn_blocks;
    };

    struct BatchOutput {
        double loss = 0.0;
        std::vector<double> probs;
    };

    struct ParamView {
        std::string name;
        Vec* value;
        Vec* grad;
    };

    TncnModel(ModelConfig cfg, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    void set_training(bool training);
    bool training() const { return training_; }

    void reset_state(NodeId node_count);
    MemorySnapshot snapshot_state() const;
    void restore_state(const MemorySnapshot& s);

    const Vec& memory_of(NodeId u) const { return mem_[static_cast<std::size_t>(u)]; }
    Timestamp last_update_of(NodeId u) const { return last_update_[static_cast<std::size_t>(u)]; }
    std::size_t memory_update_count() const { return memory_update_count_; }

    /// Applies events to the memory in order, one gated update per event. In training mode the applications are recorded so
    /// gradients can flow through them. Returns the number of events applied.
    std::size_t apply_events(std::span<const Event> events, const EventLog& log);

    /// Scores queries against the current (post-apply) state. Records the
    /// computation in training mode. Loss is mean binary cross-entropy.
    BatchOutput score_queries(const std::vector<Query>& queries,
                              const NeighborDictionary& dict, const EventLog& log);

    /// Embeddings for a node set at one shared time; never recorded.
    std::map<NodeId, Vec> compute_embeddings(const NeighborDictionary& dict, const EventLog& log,
                                             const std::vector<NodeId>& nodes, Timestamp t) const;

    /// Fills parameter gradients from the recorded forward; throws UsageError
    /// when nothing was recorded (e.g. in eval mode).
    void backward();

    void zero_grads();
    void adam_step(double lr);

    /// Folds recorded memory versions into the materialized state and drops
    /// the tape. Call once per batch after (optional) backward + step.
    void end_batch();

    std::vector<ParamView> param_views();

    // Parameter groups (exposed for checkpointing and tests).
    TimeEncoder time_enc;
    GruCell gru;
    AttentionEmbedder attn;
    MlpHead head;

private:
    struct GruApp {
        NodeId node = 0;
        double dt = 0;
        int prev_version = -1;
        int out_version = -1;
        int counterpart_prev = -1; // version of the other endpoint pre-event
        GruCell::Cache cache;
    };
    struct EmbedRec {
        NodeId node = 0;
        Timestamp t = 0;
        int center_version = -1;
        std::vector<int> nbr_versions;
        std::vector<double> nbr_dts;
        AttentionEmbedder::Cache cache;
        Vec emb;
        Vec g_emb;
    };
    struct QueryRec {
        int emb_u = -1;
        int emb_v = -1;
        // Per hop pair: contributing embed-rec indices with multipliers.
        std::vector<std::vector<std::pair<int, double>>> blocks;
        Vec repr;
        MlpHead::Cache mlp;
        double p = 0.5;
        double label = 0.0;
        double loss_scale = 1.0;
    };

    Vec message_for(const Event& e, const EventLog& log, double dt,
                    const Vec& counterpart_mem) const;
    const Vec& current_memory(NodeId u) const;
    int version_of(NodeId u) const;
    Vec embed_node(NodeId node, Timestamp t, const NeighborDictionary& dict, const EventLog& log,
                   AttentionEmbedder::Cache* cache, EmbedRec* rec) const;
    int embed_for(NodeId node, Timestamp t, const NeighborDictionary& dict, const EventLog& log);

    ModelConfig cfg_;
    bool training_ = false;
    bool recorded_ = false;

    std::vector<Vec> mem_;
    std::vector<Timestamp> last_update_;
    std::size_t memory_update_count_ = 0;

    // Batch tape.
    std::vector<Vec> version_values_;
    std::vector<Vec> version_grads_;
    std::map<NodeId, int> latest_version_;
    std::vector<GruApp> gru_tape_;
    std::vector<EmbedRec> embed_tape_;
    std::map<std::pair<NodeId, double>, int> embed_key_;
    std::vector<QueryRec> query_tape_;

    // Gradient buffers.
    Vec g_time_freq_, g_time_phase_;
    GruCell::Grads g_gru_;
    AttentionEmbedder::Grads g_attn_;
    MlpHead::Grads g_head_;

    // Adam state, parallel to param_views() order.
    std::vector<Vec> adam_m_;
    std::vector<Vec> adam_v_;
    std::int64_t adam_t_ = 0;
};

} // namespace tncn
