#pragma once

#include <vector>

#include "tncn/matrix.hpp"

namespace tncn {

/// Single multi-head attention layer over a node's recent neighbors.
///
/// Query comes from the center memory; keys and values from the concatenated
/// neighbor inputs [neighbor memory ; edge feature ; time encoding]. The
/// attended vector and the center memory pass through one output projection,
/// so a node without neighbors still gets an embedding from its own memory.
struct AttentionEmbedder {
    Mat w_q; // (heads*head_dim) x mem_dim
    Mat w_k; // (heads*head_dim) x z_dim, no bias: a uniform key shift cancels in the softmax
    Mat w_v;
    Mat w_o; // emb_dim x (heads*head_dim + mem_dim)
    Vec b_q, b_v, b_o;
    std::size_t heads = 1;

    std::size_t emb_dim() const { return w_o.rows; }
    std::size_t mem_dim() const { return w_q.cols; }
    std::size_t z_dim() const { return w_k.cols; }
    std::size_t inner() const { return w_q.rows; }

    static AttentionEmbedder init(std::size_t mem_dim, std::size_t z_dim, std::size_t emb_dim,
                                  std::size_t heads, std::mt19937_64& rng);

    struct Cache {
        Vec center;
        std::vector<Vec> z;
        Vec q;
        std::vector<Vec> k, v;
        Vec alpha; // heads x n, row-major
        Vec att;
    };

    Vec forward(const Vec& center_mem, const std::vector<Vec>& neighbor_inputs,
                Cache* cache = nullptr) const;

    struct Grads {
        Mat w_q, w_k, w_v, w_o;
        Vec b_q, b_v, b_o;
    };
    Grads make_grads() const;

    /// Returns (d center_mem, d neighbor_inputs).
    std::pair<Vec, std::vector<Vec>> backward(const Cache& c, const Vec& g_out, Grads& g) const;
};

} // namespace tncn
