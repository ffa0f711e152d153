#include "tncn/model.hpp"

#include <algorithm>
#include <cmath>

#include "tncn/errors.hpp"

namespace tncn {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Numerically stable BCE with logits.
inline double bce_loss(double logit, double label) {
    return std::max(logit, 0.0) - logit * label + std::log1p(std::exp(-std::abs(logit)));
}

} // namespace

MlpHead MlpHead::init(std::size_t in_dim, std::size_t hidden, std::mt19937_64& rng) {
    MlpHead h;
    h.w1 = Mat(hidden, in_dim);
    h.b1 = zeros(hidden);
    h.w2 = Mat(1, hidden);
    h.b2 = zeros(1);
    init_uniform(h.w1, rng);
    init_uniform(h.b1, in_dim, rng);
    init_uniform(h.w2, rng);
    init_uniform(h.b2, hidden, rng);
    return h;
}

double MlpHead::forward(const Vec& repr, Cache* cache) const {
    Vec pre1 = matvec(w1, repr);
    add_inplace(pre1, b1);
    Vec h1(pre1.size());
    for (std::size_t i = 0; i < pre1.size(); ++i) h1[i] = pre1[i] > 0 ? pre1[i] : 0.0;
    double logit = dot(w2.a, h1) + b2[0];
    if (cache) {
        cache->in = repr;
        cache->pre1 = std::move(pre1);
        cache->h1 = std::move(h1);
    }
    return logit;
}

MlpHead::Grads MlpHead::make_grads() const {
    Grads g;
    g.w1 = Mat(w1.rows, w1.cols);
    g.w2 = Mat(w2.rows, w2.cols);
    g.b1 = zeros(b1.size());
    g.b2 = zeros(b2.size());
    return g;
}

Vec MlpHead::backward(const Cache& c, double g_logit, Grads& g) const {
    for (std::size_t i = 0; i < c.h1.size(); ++i) g.w2.a[i] += g_logit * c.h1[i];
    g.b2[0] += g_logit;
    Vec g_h1(c.h1.size());
    for (std::size_t i = 0; i < c.h1.size(); ++i) {
        g_h1[i] = c.pre1[i] > 0 ? g_logit * w2.a[i] : 0.0;
    }
    outer_acc(g.w1, g_h1, c.in);
    add_inplace(g.b1, g_h1);
    return matvec_t(w1, g_h1);
}

Vec ncn_aggregate(const std::map<NodeId, Vec>& embeddings,
                  const std::map<NodeId, std::int64_t>& cn_nodes,
                  std::size_t emb_dim, bool weighted) {
    Vec out = zeros(emb_dim);
    for (const auto& [node, w] : cn_nodes) {
        auto it = embeddings.find(node);
        if (it == embeddings.end()) {
            throw DataError("ncn_aggregate: no embedding for node " + std::to_string(node));
        }
        axpy(out, weighted ? static_cast<double>(w) : 1.0, it->second);
    }
    return out;
}

Vec pair_representation(const Vec& emb_u, const Vec& emb_v, const std::vector<Vec>& ncn_blocks) {
    if (emb_u.size() != emb_v.size()) {
        throw SchemaError("pair_representation: endpoint embedding dims differ");
    }
    Vec out;
    out.reserve(emb_u.size() * (1 + ncn_blocks.size()));
    for (std::size_t i = 0; i < emb_u.size(); ++i) out.push_back(emb_u[i] * emb_v[i]);
    for (const Vec& b : ncn_blocks) {
        if (b.size() != emb_u.size()) {
            throw SchemaError("pair_representation: block dim " + std::to_string(b.size()) +
                              " != emb dim " + std::to_string(emb_u.size()));
        }
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

double predict(const MlpHead& head, const Vec& repr) {
    return sigmoid(head.forward(repr));
}

TncnModel::TncnModel(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
    std::mt19937_64 rng(seed);
    std::size_t msg_dim = cfg_.feat_dim + cfg_.time_dim + cfg_.mem_dim;
    std::size_t z_dim = cfg_.mem_dim + cfg_.feat_dim + cfg_.time_dim;
    std::size_t hidden = cfg_.head_hidden == 0 ? cfg_.emb_dim : cfg_.head_hidden;
    time_enc = TimeEncoder::init(cfg_.time_dim, rng);
    gru = GruCell::init(msg_dim, cfg_.mem_dim, rng);
    attn = AttentionEmbedder::init(cfg_.mem_dim, z_dim, cfg_.emb_dim, cfg_.heads, rng);
    head = MlpHead::init(cfg_.emb_dim * (1 + cfg_.hop_order.size()), hidden, rng);

    g_time_freq_ = zeros(cfg_.time_dim);
    g_time_phase_ = zeros(cfg_.time_dim);
    g_gru_ = gru.make_grads();
    g_attn_ = attn.make_grads();
    g_head_ = head.make_grads();

    for (const ParamView& p : param_views()) {
        adam_m_.push_back(zeros(p.value->size()));
        adam_v_.push_back(zeros(p.value->size()));
    }
}

void TncnModel::set_training(bool training) {
    if (training_ != training) end_batch();
    training_ = training;
}

void TncnModel::reset_state(NodeId node_count) {
    mem_.assign(static_cast<std::size_t>(node_count), zeros(cfg_.mem_dim));
    last_update_.assign(static_cast<std::size_t>(node_count), 0.0);
    memory_update_count_ = 0;
    end_batch();
}

MemorySnapshot TncnModel::snapshot_state() const {
    return {mem_, last_update_};
}

void TncnModel::restore_state(const MemorySnapshot& s) {
    mem_ = s.mem;
    last_update_ = s.last_update;
    end_batch();
}

const Vec& TncnModel::current_memory(NodeId u) const {
    auto it = latest_version_.find(u);
    if (it != latest_version_.end()) return version_values_[static_cast<std::size_t>(it->second)];
    return mem_[static_cast<std::size_t>(u)];
}

int TncnModel::version_of(NodeId u) const {
    auto it = latest_version_.find(u);
    return it == latest_version_.end() ? -1 : it->second;
}

Vec TncnModel::message_for(const Event& e, const EventLog& log, double dt,
                           const Vec& counterpart_mem) const {
    Vec msg;
    msg.reserve(cfg_.feat_dim + cfg_.time_dim + cfg_.mem_dim);
    auto fv = log.feat(e.event_idx);
    msg.insert(msg.end(), fv.begin(), fv.end());
    if (fv.size() != cfg_.feat_dim) {
        throw SchemaError("event feature dim " + std::to_string(fv.size()) +
                          " != configured " + std::to_string(cfg_.feat_dim));
    }
    Vec phi = time_enc.encode(dt);
    msg.insert(msg.end(), phi.begin(), phi.end());
    msg.insert(msg.end(), counterpart_mem.begin(), counterpart_mem.end());
    return msg;
}

std::size_t TncnModel::apply_events(std::span<const Event> events, const EventLog& log) {
    for (const Event& e : events) {
        auto run_role = [&](NodeId node, int prev, int cp_prev, double dt, const Vec& own,
                            const Vec& cp_mem) {
            if (dt < 0) {
                throw CausalityError("memory update at t=" + std::to_string(e.t) +
                                     " behind node " + std::to_string(node) + " last update");
            }
            Vec msg = message_for(e, log, dt, cp_mem);
            if (training_) {
                GruApp app;
                app.node = node;
                app.dt = dt;
                app.prev_version = prev;
                app.counterpart_prev = cp_prev;
                Vec out = gru.forward(msg, own, &app.cache);
                version_values_.push_back(std::move(out));
                version_grads_.push_back(zeros(cfg_.mem_dim));
                app.out_version = static_cast<int>(version_values_.size()) - 1;
                latest_version_[node] = app.out_version;
                gru_tape_.push_back(std::move(app));
                recorded_ = true;
            } else {
                mem_[static_cast<std::size_t>(node)] = gru.forward(msg, own);
            }
        };
        // Both roles read the pre-event state; a self-loop degenerates to two
        // sequential updates of the same row.
        int sv = version_of(e.src);
        int dv = version_of(e.dst);
        Vec src_pre = current_memory(e.src);
        Vec dst_pre = current_memory(e.dst);
        double dt_src = e.t - last_update_[static_cast<std::size_t>(e.src)];
        double dt_dst = e.t - last_update_[static_cast<std::size_t>(e.dst)];
        run_role(e.src, sv, dv, dt_src, src_pre, dst_pre);
        if (e.src == e.dst) {
            run_role(e.dst, version_of(e.dst), sv, dt_dst, current_memory(e.dst), src_pre);
        } else {
            run_role(e.dst, dv, sv, dt_dst, dst_pre, src_pre);
        }
        last_update_[static_cast<std::size_t>(e.src)] = e.t;
        last_update_[static_cast<std::size_t>(e.dst)] = e.t;
        memory_update_count_ += 1;
    }
    return events.size();
}

Vec TncnModel::embed_node(NodeId node, Timestamp t, const NeighborDictionary& dict,
                          const EventLog& log, AttentionEmbedder::Cache* cache,
                          EmbedRec* rec) const {
    auto nbrs = dict.recent_neighbors(node, cfg_.num_neighbors);
    std::vector<Vec> z;
    z.reserve(nbrs.size());
    for (const auto& entry : nbrs) {
        double dt = t - entry.t;
        Vec zi;
        zi.reserve(cfg_.mem_dim + cfg_.feat_dim + cfg_.time_dim);
        const Vec& nm = current_memory(entry.neighbor);
        zi.insert(zi.end(), nm.begin(), nm.end());
        auto fv = log.feat(entry.edge_ref);
        zi.insert(zi.end(), fv.begin(), fv.end());
        Vec phi = time_enc.encode(dt);
        zi.insert(zi.end(), phi.begin(), phi.end());
        z.push_back(std::move(zi));
        if (rec) {
            rec->nbr_versions.push_back(version_of(entry.neighbor));
            rec->nbr_dts.push_back(dt);
        }
    }
    if (rec) rec->center_version = version_of(node);
    return attn.forward(current_memory(node), z, cache);
}

int TncnModel::embed_for(NodeId node, Timestamp t, const NeighborDictionary& dict,
                         const EventLog& log) {
    auto key = std::make_pair(node, t);
    auto it = embed_key_.find(key);
    if (it != embed_key_.end()) return it->second;
    EmbedRec rec;
    rec.node = node;
    rec.t = t;
    rec.emb = embed_node(node, t, dict, log, training_ ? &rec.cache : nullptr,
                         training_ ? &rec : nullptr);
    rec.g_emb = training_ ? zeros(cfg_.emb_dim) : Vec{};
    embed_tape_.push_back(std::move(rec));
    int idx = static_cast<int>(embed_tape_.size()) - 1;
    embed_key_.emplace(key, idx);
    return idx;
}

std::map<NodeId, Vec> TncnModel::compute_embeddings(const NeighborDictionary& dict,
                                                    const EventLog& log,
                                                    const std::vector<NodeId>& nodes,
                                                    Timestamp t) const {
    std::map<NodeId, Vec> out;
    for (NodeId n : nodes) out[n] = embed_node(n, t, dict, log, nullptr, nullptr);
    return out;
}

TncnModel::BatchOutput TncnModel::score_queries(const std::vector<Query>& queries,
                                                const NeighborDictionary& dict,
                                                const EventLog& log) {
    BatchOutput out;
    if (queries.empty()) return out;
    double scale = 1.0 / static_cast<double>(queries.size());
    for (const Query& q : queries) {
        if (q.cn_blocks.size() != cfg_.hop_order.size()) {
            throw SchemaError("query carries " + std::to_string(q.cn_blocks.size()) +
                              " CN blocks, config expects " + std::to_string(cfg_.hop_order.size()));
        }
        QueryRec rec;
        rec.emb_u = embed_for(q.src, q.t, dict, log);
        rec.emb_v = embed_for(q.dst, q.t, dict, log);
        std::vector<Vec> blocks;
        blocks.reserve(q.cn_blocks.size());
        rec.blocks.resize(q.cn_blocks.size());
        for (std::size_t b = 0; b < q.cn_blocks.size(); ++b) {
            Vec block = zeros(cfg_.emb_dim);
            for (const auto& [node, w] : q.cn_blocks[b]) {
                double mult = cfg_.cn_weighted ? static_cast<double>(w) : 1.0;
                int idx = embed_for(node, q.t, dict, log);
                axpy(block, mult, embed_tape_[static_cast<std::size_t>(idx)].emb);
                rec.blocks[b].emplace_back(idx, mult);
            }
            blocks.push_back(std::move(block));
        }
        const Vec& eu = embed_tape_[static_cast<std::size_t>(rec.emb_u)].emb;
        const Vec& ev = embed_tape_[static_cast<std::size_t>(rec.emb_v)].emb;
        Vec repr = pair_representation(eu, ev, blocks);
        double logit = head.forward(repr, training_ ? &rec.mlp : nullptr);
        double p = sigmoid(logit);
        out.loss += bce_loss(logit, q.label) * scale;
        out.probs.push_back(p);
        if (training_) {
            rec.repr = std::move(repr);
            rec.p = p;
            rec.label = q.label;
            rec.loss_scale = scale;
            query_tape_.push_back(std::move(rec));
            recorded_ = true;
        }
    }
    return out;
}

void TncnModel::backward() {
    if (!recorded_ || query_tape_.empty()) {
        throw UsageError("backward without a recorded forward (training mode required)");
    }
    // Head and pair representation.
    for (auto it = query_tape_.rbegin(); it != query_tape_.rend(); ++it) {
        QueryRec& rec = *it;
        double g_logit = (rec.p - rec.label) * rec.loss_scale;
        Vec g_repr = head.backward(rec.mlp, g_logit, g_head_);
        EmbedRec& ru = embed_tape_[static_cast<std::size_t>(rec.emb_u)];
        EmbedRec& rv = embed_tape_[static_cast<std::size_t>(rec.emb_v)];
        for (std::size_t i = 0; i < cfg_.emb_dim; ++i) {
            ru.g_emb[i] += g_repr[i] * rv.emb[i];
            rv.g_emb[i] += g_repr[i] * ru.emb[i];
        }
        for (std::size_t b = 0; b < rec.blocks.size(); ++b) {
            std::size_t off = cfg_.emb_dim * (1 + b);
            for (const auto& [idx, mult] : rec.blocks[b]) {
                EmbedRec& rw = embed_tape_[static_cast<std::size_t>(idx)];
                for (std::size_t i = 0; i < cfg_.emb_dim; ++i) {
                    rw.g_emb[i] += mult * g_repr[off + i];
                }
            }
        }
    }
    // Attention embeddings -> memory versions + time encoder.
    for (auto it = embed_tape_.rbegin(); it != embed_tape_.rend(); ++it) {
        EmbedRec& rec = *it;
        auto [g_center, g_z] = attn.backward(rec.cache, rec.g_emb, g_attn_);
        if (rec.center_version >= 0) {
            add_inplace(version_grads_[static_cast<std::size_t>(rec.center_version)], g_center);
        }
        for (std::size_t i = 0; i < g_z.size(); ++i) {
            if (rec.nbr_versions[i] >= 0) {
                Vec& vg = version_grads_[static_cast<std::size_t>(rec.nbr_versions[i])];
                for (std::size_t d = 0; d < cfg_.mem_dim; ++d) vg[d] += g_z[i][d];
            }
            Vec g_phi(g_z[i].begin() + static_cast<std::ptrdiff_t>(cfg_.mem_dim + cfg_.feat_dim),
                      g_z[i].end());
            time_enc.backward(rec.nbr_dts[i], g_phi, g_time_freq_, g_time_phase_);
        }
    }
    // Gated memory chain, newest first.
    for (auto it = gru_tape_.rbegin(); it != gru_tape_.rend(); ++it) {
        GruApp& app = *it;
        const Vec& g_out = version_grads_[static_cast<std::size_t>(app.out_version)];
        auto [g_m, g_h] = gru.backward(app.cache, g_out, g_gru_);
        if (app.prev_version >= 0) {
            add_inplace(version_grads_[static_cast<std::size_t>(app.prev_version)], g_h);
        }
        Vec g_phi(g_m.begin() + static_cast<std::ptrdiff_t>(cfg_.feat_dim),
                  g_m.begin() + static_cast<std::ptrdiff_t>(cfg_.feat_dim + cfg_.time_dim));
        time_enc.backward(app.dt, g_phi, g_time_freq_, g_time_phase_);
        if (app.counterpart_prev >= 0) {
            Vec& vg = version_grads_[static_cast<std::size_t>(app.counterpart_prev)];
            std::size_t off = cfg_.feat_dim + cfg_.time_dim;
            for (std::size_t d = 0; d < cfg_.mem_dim; ++d) vg[d] += g_m[off + d];
        }
    }
}

void TncnModel::zero_grads() {
    std::fill(g_time_freq_.begin(), g_time_freq_.end(), 0.0);
    std::fill(g_time_phase_.begin(), g_time_phase_.end(), 0.0);
    g_gru_.w_r.zero();
    g_gru_.w_z.zero();
    g_gru_.w_n.zero();
    std::fill(g_gru_.b_r.begin(), g_gru_.b_r.end(), 0.0);
    std::fill(g_gru_.b_z.begin(), g_gru_.b_z.end(), 0.0);
    std::fill(g_gru_.b_n.begin(), g_gru_.b_n.end(), 0.0);
    g_attn_.w_q.zero();
    g_attn_.w_k.zero();
    g_attn_.w_v.zero();
    g_attn_.w_o.zero();
    std::fill(g_attn_.b_q.begin(), g_attn_.b_q.end(), 0.0);
    std::fill(g_attn_.b_v.begin(), g_attn_.b_v.end(), 0.0);
    std::fill(g_attn_.b_o.begin(), g_attn_.b_o.end(), 0.0);
    g_head_.w1.zero();
    g_head_.w2.zero();
    std::fill(g_head_.b1.begin(), g_head_.b1.end(), 0.0);
    std::fill(g_head_.b2.begin(), g_head_.b2.end(), 0.0);
}

void TncnModel::adam_step(double lr) {
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;
    ++adam_t_;
    double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam_t_));
    double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam_t_));
    auto views = param_views();
    for (std::size_t i = 0; i < views.size(); ++i) {
        Vec& value = *views[i].value;
        Vec& grad = *views[i].grad;
        Vec& m = adam_m_[i];
        Vec& v = adam_v_[i];
        for (std::size_t j = 0; j < value.size(); ++j) {
            m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * grad[j];
            v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * grad[j] * grad[j];
            value[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + kEps);
        }
    }
}

void TncnModel::end_batch() {
    for (const auto& [node, ver] : latest_version_) {
        mem_[static_cast<std::size_t>(node)] = version_values_[static_cast<std::size_t>(ver)];
    }
    version_values_.clear();
    version_grads_.clear();
    latest_version_.clear();
    gru_tape_.clear();
    embed_tape_.clear();
    embed_key_.clear();
    query_tape_.clear();
    recorded_ = false;
}

std::vector<TncnModel::ParamView> TncnModel::param_views() {
    return {
        {"time.freq", &time_enc.freq, &g_time_freq_},
        {"time.phase", &time_enc.phase, &g_time_phase_},
        {"gru.w_r", &gru.w_r.a, &g_gru_.w_r.a},
        {"gru.w_z", &gru.w_z.a, &g_gru_.w_z.a},
        {"gru.w_n", &gru.w_n.a, &g_gru_.w_n.a},
        {"gru.b_r", &gru.b_r, &g_gru_.b_r},
        {"gru.b_z", &gru.b_z, &g_gru_.b_z},
        {"gru.b_n", &gru.b_n, &g_gru_.b_n},
        {"attn.w_q", &attn.w_q.a, &g_attn_.w_q.a},
        {"attn.w_k", &attn.w_k.a, &g_attn_.w_k.a},
        {"attn.w_v", &attn.w_v.a, &g_attn_.w_v.a},
        {"attn.w_o", &attn.w_o.a, &g_attn_.w_o.a},
        {"attn.b_q", &attn.b_q, &g_attn_.b_q},
        {"attn.b_v", &attn.b_v, &g_attn_.b_v},
        {"attn.b_o", &attn.b_o, &g_attn_.b_o},
        {"head.w1", &head.w1.a, &g_head_.w1.a},
        {"head.b1", &head.b1, &g_head_.b1},
        {"head.w2", &head.w2.a, &g_head_.w2.a},
        {"head.b2", &head.b2, &g_head_.b2},
    };
}

} // namespace tncn
