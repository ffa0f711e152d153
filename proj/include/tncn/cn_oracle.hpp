#pragma once

#include <cstdint>
#include <map>

#include "tncn/types.hpp"

namespace tncn {

/// Reference (i,j)-hop common-neighbor counts by exhaustive path enumeration.
///
/// Rebuilds edge visibility directly from the log: an event strictly before
/// `t` is visible while it is among the k_recent most recent events of at
/// least one endpoint (k_recent = 0 keeps everything). For each candidate x
/// it multiplies the number of length-i paths u->x and length-j paths v->x
/// whose intermediate nodes avoid u, v and x, each path weighted by the
/// product of its edge frequencies. Meant for small instances only;
/// the cost grows combinatorially with degree.
std::map<NodeId, std::int64_t> cn_oracle(const EventLog& log, NodeId u, NodeId v,
                                         int hop_u, int hop_v, Timestamp t,
                                         std::size_t k_recent);

} // namespace tncn
