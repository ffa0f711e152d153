#include "tncn/attention.hpp"

#include <cmath>

#include "tncn/errors.hpp"

namespace tncn {

AttentionEmbedder AttentionEmbedder::init(std::size_t mem_dim, std::size_t z_dim,
                                          std::size_t emb_dim, std::size_t heads,
                                          std::mt19937_64& rng) {
    if (heads == 0 || emb_dim % heads != 0) {
        throw UsageError("emb_dim must be divisible by the head count");
    }
    AttentionEmbedder e;
    e.heads = heads;
    std::size_t inner = emb_dim;
    e.w_q = Mat(inner, mem_dim);
    e.w_k = Mat(inner, z_dim);
    e.w_v = Mat(inner, z_dim);
    e.w_o = Mat(emb_dim, inner + mem_dim);
    e.b_q = zeros(inner);
    e.b_v = zeros(inner);
    e.b_o = zeros(emb_dim);
    init_uniform(e.w_q, rng);
    init_uniform(e.w_k, rng);
    init_uniform(e.w_v, rng);
    init_uniform(e.w_o, rng);
    init_uniform(e.b_q, mem_dim, rng);
    init_uniform(e.b_v, z_dim, rng);
    init_uniform(e.b_o, inner + mem_dim, rng);
    return e;
}

Vec AttentionEmbedder::forward(const Vec& center_mem, const std::vector<Vec>& neighbor_inputs,
                               Cache* cache) const {
    std::size_t n = neighbor_inputs.size();
    std::size_t dh = inner() / heads;
    double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Vec q = matvec(w_q, center_mem);
    add_inplace(q, b_q);

    std::vector<Vec> k(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
        k[i] = matvec(w_k, neighbor_inputs[i]);
        v[i] = matvec(w_v, neighbor_inputs[i]);
        add_inplace(v[i], b_v);
    }

    Vec alpha(heads * n, 0.0);
    Vec att(inner(), 0.0);
    for (std::size_t h = 0; h < heads; ++h) {
        if (n == 0) break;
        double max_s = -1e300;
        Vec scores(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t d = 0; d < dh; ++d) s += q[h * dh + d] * k[i][h * dh + d];
            scores[i] = s * scale;
            max_s = std::max(max_s, scores[i]);
        }
        double denom = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = std::exp(scores[i] - max_s);
            denom += scores[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double a = scores[i] / denom;
            alpha[h * n + i] = a;
            for (std::size_t d = 0; d < dh; ++d) att[h * dh + d] += a * v[i][h * dh + d];
        }
    }

    Vec out = matvec(w_o, concat(att, center_mem));
    add_inplace(out, b_o);

    if (cache) {
        cache->center = center_mem;
        cache->z = neighbor_inputs;
        cache->q = std::move(q);
        cache->k = std::move(k);
        cache->v = std::move(v);
        cache->alpha = std::move(alpha);
        cache->att = std::move(att);
    }
    return out;
}

AttentionEmbedder::Grads AttentionEmbedder::make_grads() const {
    Grads g;
    g.w_q = Mat(w_q.rows, w_q.cols);
    g.w_k = Mat(w_k.rows, w_k.cols);
    g.w_v = Mat(w_v.rows, w_v.cols);
    g.w_o = Mat(w_o.rows, w_o.cols);
    g.b_q = zeros(b_q.size());
    g.b_v = zeros(b_v.size());
    g.b_o = zeros(b_o.size());
    return g;
}

std::pair<Vec, std::vector<Vec>> AttentionEmbedder::backward(const Cache& c, const Vec& g_out,
                                                             Grads& g) const {
    std::size_t n = c.z.size();
    std::size_t dh = inner() / heads;
    double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Vec in_o = concat(c.att, c.center);
    outer_acc(g.w_o, g_out, in_o);
    add_inplace(g.b_o, g_out);
    Vec g_in_o = matvec_t(w_o, g_out);

    Vec g_att(g_in_o.begin(), g_in_o.begin() + static_cast<std::ptrdiff_t>(inner()));
    Vec g_center(g_in_o.begin() + static_cast<std::ptrdiff_t>(inner()), g_in_o.end());

    Vec g_q(inner(), 0.0);
    std::vector<Vec> g_k(n, zeros(inner())), g_v(n, zeros(inner()));
    for (std::size_t h = 0; h < heads && n > 0; ++h) {
        // d alpha, then softmax jacobian, then scores.
        Vec g_alpha(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t d = 0; d < dh; ++d) {
                acc += g_att[h * dh + d] * c.v[i][h * dh + d];
                g_v[i][h * dh + d] += c.alpha[h * n + i] * g_att[h * dh + d];
            }
            g_alpha[i] = acc;
        }
        double weighted = 0.0;
        for (std::size_t i = 0; i < n; ++i) weighted += c.alpha[h * n + i] * g_alpha[i];
        for (std::size_t i = 0; i < n; ++i) {
            double g_s = c.alpha[h * n + i] * (g_alpha[i] - weighted) * scale;
            for (std::size_t d = 0; d < dh; ++d) {
                g_q[h * dh + d] += g_s * c.k[i][h * dh + d];
                g_k[i][h * dh + d] += g_s * c.q[h * dh + d];
            }
        }
    }

    outer_acc(g.w_q, g_q, c.center);
    add_inplace(g.b_q, g_q);
    Vec g_center_q = matvec_t(w_q, g_q);
    add_inplace(g_center, g_center_q);

    std::vector<Vec> g_z(n);
    for (std::size_t i = 0; i < n; ++i) {
        outer_acc(g.w_k, g_k[i], c.z[i]);
        outer_acc(g.w_v, g_v[i], c.z[i]);
        add_inplace(g.b_v, g_v[i]);
        g_z[i] = matvec_t(w_k, g_k[i]);
        Vec gv = matvec_t(w_v, g_v[i]);
        add_inplace(g_z[i], gv);
    }
    return {std::move(g_center), std::move(g_z)};
}

} // namespace tncn
