#pragma once

#include "tncn/matrix.hpp"

namespace tncn {

/// Gated recurrent update mapping (message, previous memory) -> new memory.
///
///   r  = sigmoid(Wr [m ; h] + br)
///   z  = sigmoid(Wz [m ; h] + bz)
///   n  = tanh(Wn [m ; r*h] + bn)
///   h' = z*h + (1-z)*n
struct GruCell {
    Mat w_r, w_z, w_n; // hidden x (msg + hidden)
    Vec b_r, b_z, b_n;

    std::size_t hidden() const { return w_r.rows; }
    std::size_t msg_dim() const { return w_r.cols - w_r.rows; }

    static GruCell init(std::size_t msg_dim, std::size_t hidden, std::mt19937_64& rng);

    struct Cache {
        Vec m, h, r, z, n;
    };

    Vec forward(const Vec& m, const Vec& h, Cache* cache = nullptr) const;

    struct Grads {
        Mat w_r, w_z, w_n;
        Vec b_r, b_z, b_n;
    };
    Grads make_grads() const;

    /// Backpropagates dL/dh' into parameter grads; returns (dL/dm, dL/dh).
    std::pair<Vec, Vec> backward(const Cache& c, const Vec& g_out, Grads& g) const;
};

} // namespace tncn
