#include "tncn/time_encoding.hpp"

#include <cmath>

#include "tncn/errors.hpp"

namespace tncn {

TimeEncoder TimeEncoder::init(std::size_t dim, std::mt19937_64& rng) {
    TimeEncoder e;
    e.freq.resize(dim);
    e.phase.resize(dim);
    init_uniform(e.freq, 1, rng);
    init_uniform(e.phase, 1, rng);
    return e;
}

Vec TimeEncoder::encode(double dt) const {
    if (dt < 0) {
        throw CausalityError("time encoding of negative delta " + std::to_string(dt));
    }
    Vec out(dim());
    for (std::size_t k = 0; k < dim(); ++k) {
        out[k] = std::cos(freq[k] * dt + phase[k]);
    }
    return out;
}

void TimeEncoder::backward(double dt, const Vec& g_out, Vec& g_freq, Vec& g_phase) const {
    for (std::size_t k = 0; k < dim(); ++k) {
        double s = -std::sin(freq[k] * dt + phase[k]) * g_out[k];
        g_freq[k] += s * dt;
        g_phase[k] += s;
    }
}

} // namespace tncn
