#pragma once

#include <cstdint>

#include "tncn/matrix.hpp"
#include "tncn/types.hpp"

namespace tncn {

/// Learnable periodic time encoding: phi(dt)[k] = cos(freq[k] * dt + phase[k]).
struct TimeEncoder {
    Vec freq;
    Vec phase;

    std::size_t dim() const { return freq.size(); }

    static TimeEncoder init(std::size_t dim, std::mt19937_64& rng);

    /// Throws CausalityError for dt < 0.
    Vec encode(double dt) const;

    /// Accumulates dL/dfreq and dL/dphase for one encode call.
    void backward(double dt, const Vec& g_out, Vec& g_freq, Vec& g_phase) const;
};

} // namespace tncn
