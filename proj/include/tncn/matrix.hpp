#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace tncn {

using Vec = std::vector<double>;

/// Row-major dense matrix, just enough for the model's linear algebra.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
    void zero() { std::fill(a.begin(), a.end(), 0.0); }
};

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

/// y = M x
inline Vec matvec(const Mat& m, const Vec& x) {
    assert(x.size() == m.cols);
    Vec y(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.a.data() + r * m.cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
    return y;
}

/// y = M^T x
inline Vec matvec_t(const Mat& m, const Vec& x) {
    assert(x.size() == m.rows);
    Vec y(m.cols, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.a.data() + r * m.cols;
        double g = x[r];
        if (g == 0.0) continue;
        for (std::size_t c = 0; c < m.cols; ++c) y[c] += g * row[c];
    }
    return y;
}

/// G += g x^T  (outer-product accumulation for weight gradients)
inline void outer_acc(Mat& grad, const Vec& g, const Vec& x) {
    assert(g.size() == grad.rows && x.size() == grad.cols);
    for (std::size_t r = 0; r < grad.rows; ++r) {
        double gr = g[r];
        if (gr == 0.0) continue;
        double* row = grad.a.data() + r * grad.cols;
        for (std::size_t c = 0; c < grad.cols; ++c) row[c] += gr * x[c];
    }
}

inline void axpy(Vec& y, double alpha, const Vec& x) {
    assert(y.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void add_inplace(Vec& y, const Vec& x) { axpy(y, 1.0, x); }

inline Vec concat(const Vec& a, const Vec& b) {
    Vec out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

inline double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Uniform fill in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
inline void init_uniform(Vec& v, std::size_t fan_in, std::mt19937_64& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in == 0 ? 1 : fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& x : v) x = dist(rng);
}

inline void init_uniform(Mat& m, std::mt19937_64& rng) { init_uniform(m.a, m.cols, rng); }

} // namespace tncn
