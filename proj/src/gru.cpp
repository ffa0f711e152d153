#include "tncn/gru.hpp"

#include <cmath>

namespace tncn {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vec gate(const Mat& w, const Vec& b, const Vec& input, bool tanh_act) {
    Vec out = matvec(w, input);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = tanh_act ? std::tanh(out[i] + b[i]) : sigmoid(out[i] + b[i]);
    }
    return out;
}

} // namespace

GruCell GruCell::init(std::size_t msg_dim, std::size_t hidden, std::mt19937_64& rng) {
    GruCell g;
    std::size_t in = msg_dim + hidden;
    g.w_r = Mat(hidden, in);
    g.w_z = Mat(hidden, in);
    g.w_n = Mat(hidden, in);
    g.b_r = zeros(hidden);
    g.b_z = zeros(hidden);
    g.b_n = zeros(hidden);
    init_uniform(g.w_r, rng);
    init_uniform(g.w_z, rng);
    init_uniform(g.w_n, rng);
    init_uniform(g.b_r, in, rng);
    init_uniform(g.b_z, in, rng);
    init_uniform(g.b_n, in, rng);
    return g;
}

Vec GruCell::forward(const Vec& m, const Vec& h, Cache* cache) const {
    Vec c0 = concat(m, h);
    Vec r = gate(w_r, b_r, c0, false);
    Vec z = gate(w_z, b_z, c0, false);
    Vec rh(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) rh[i] = r[i] * h[i];
    Vec n = gate(w_n, b_n, concat(m, rh), true);
    Vec out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        out[i] = z[i] * h[i] + (1.0 - z[i]) * n[i];
    }
    if (cache) {
        cache->m = m;
        cache->h = h;
        cache->r = std::move(r);
        cache->z = std::move(z);
        cache->n = std::move(n);
    }
    return out;
}

GruCell::Grads GruCell::make_grads() const {
    Grads g;
    g.w_r = Mat(w_r.rows, w_r.cols);
    g.w_z = Mat(w_z.rows, w_z.cols);
    g.w_n = Mat(w_n.rows, w_n.cols);
    g.b_r = zeros(b_r.size());
    g.b_z = zeros(b_z.size());
    g.b_n = zeros(b_n.size());
    return g;
}

std::pair<Vec, Vec> GruCell::backward(const Cache& c, const Vec& g_out, Grads& g) const {
    std::size_t hid = c.h.size();
    std::size_t md = c.m.size();
    Vec g_m = zeros(md);
    Vec g_h = zeros(hid);

    Vec g_z(hid), g_n(hid);
    for (std::size_t i = 0; i < hid; ++i) {
        g_z[i] = (c.h[i] - c.n[i]) * g_out[i];
        g_n[i] = (1.0 - c.z[i]) * g_out[i];
        g_h[i] += c.z[i] * g_out[i];
    }

    // n gate: input was [m ; r*h]
    Vec g_an(hid);
    for (std::size_t i = 0; i < hid; ++i) g_an[i] = (1.0 - c.n[i] * c.n[i]) * g_n[i];
    Vec rh(hid);
    for (std::size_t i = 0; i < hid; ++i) rh[i] = c.r[i] * c.h[i];
    Vec c1 = concat(c.m, rh);
    outer_acc(g.w_n, g_an, c1);
    add_inplace(g.b_n, g_an);
    Vec g_c1 = matvec_t(w_n, g_an);
    Vec g_r(hid);
    for (std::size_t i = 0; i < md; ++i) g_m[i] += g_c1[i];
    for (std::size_t i = 0; i < hid; ++i) {
        double g_rh = g_c1[md + i];
        g_r[i] = c.h[i] * g_rh;
        g_h[i] += c.r[i] * g_rh;
    }

    Vec c0 = concat(c.m, c.h);
    auto sigmoid_gate_back = [&](const Vec& act, const Vec& g_act, Mat& gw, Vec& gb, const Mat& w) {
        Vec g_a(hid);
        for (std::size_t i = 0; i < hid; ++i) g_a[i] = act[i] * (1.0 - act[i]) * g_act[i];
        outer_acc(gw, g_a, c0);
        add_inplace(gb, g_a);
        Vec g_c0 = matvec_t(w, g_a);
        for (std::size_t i = 0; i < md; ++i) g_m[i] += g_c0[i];
        for (std::size_t i = 0; i < hid; ++i) g_h[i] += g_c0[md + i];
    };
    sigmoid_gate_back(c.z, g_z, g.w_z, g.b_z, w_z);
    sigmoid_gate_back(c.r, g_r, g.w_r, g.b_r, w_r);

    return {std::move(g_m), std::move(g_h)};
}

} // namespace tncn
