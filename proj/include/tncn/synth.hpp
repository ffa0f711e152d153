#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tncn/types.hpp"

namespace tncn {

/// Parameters for the synthetic event-log generators. `events` is the number
/// of stream steps; timestamps are 1..events.
struct SynthParams {
    std::string kind = "bipartite-triadic"; // bipartite-triadic | periodic | erdos-temporal
    NodeId nodes = 200;
    EventIdx events = 20000;
    std::uint64_t seed = 7;

    // bipartite-triadic
    double user_frac = 0.3;
    EventIdx shuffle_every = 0; // pool reshuffle cadence; 0 -> events/8, min 400
    std::size_t k_window = 5; // visibility window used while generating
    double p_closure = 0.72;
    double p_repeat = 0.06;
    double min_test_cn_fraction = 0.70;

    // erdos-temporal
    double p = 1.0; // per-step emission probability

    // periodic
    int period = 97; // number of recurring pairs
};

/// Deterministic synthetic temporal graph.
///
/// bipartite-triadic: items belong to slowly reshuffled per-user pools; users
/// mostly close triangles into a partner's pool through a currently visible
/// wedge u-x, w-x, w-y, so those events carry a (1,2)- and (2,1)-hop common
/// neighbor at emission while uniformly sampled non-edges rarely do. The
/// generator verifies the wedge guarantee over the test range.
EventLog synth_generate(const SynthParams& params);

/// Writes events.csv, id_map.csv and split.json (70/15/15) under dir.
SplitRanges write_dataset(const std::filesystem::path& dir, const EventLog& log);

} // namespace tncn
