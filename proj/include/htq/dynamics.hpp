#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "htq/errors.hpp"

namespace htq {

// Queue lengths at the start of a slot. 64-bit so horizons of 1e8 slots with
// O(eps) drift cannot overflow.
struct QueueState {
    std::vector<std::int64_t> q;
    std::uint64_t t = 0;
};

// Arrivals, offered service, and unused service for one completed slot.
struct SlotRecord {
    std::vector<std::int64_t> a;
    std::vector<std::int64_t> s;
    std::vector<std::int64_t> u;
};

// One queue, one slot:
//   u  = max(s - a - q, 0)
//   q' = q + a - s + u     (equivalently max(q + a - s, 0))
inline std::pair<std::int64_t, std::int64_t> step_queue(std::int64_t q, std::int64_t a,
                                                        std::int64_t s) {
    const std::int64_t u = std::max<std::int64_t>(s - a - q, 0);
    return {q + a - s + u, u};
}

inline std::pair<QueueState, SlotRecord> step_system(const QueueState& state,
                                                     const std::vector<std::int64_t>& a,
                                                     const std::vector<std::int64_t>& s) {
    const std::size_t n = state.q.size();
    if (a.size() != n || s.size() != n)
        throw ValidationError("step_system: arrival/service dimension mismatch");
    QueueState next;
    next.q.resize(n);
    next.t = state.t + 1;
    SlotRecord rec{a, s, std::vector<std::int64_t>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        auto [qn, un] = step_queue(state.q[i], a[i], s[i]);
        next.q[i] = qn;
        rec.u[i] = un;
    }
    return {std::move(next), std::move(rec)};
}

}  // namespace htq
