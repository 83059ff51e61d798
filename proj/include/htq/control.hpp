#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "htq/rng.hpp"

namespace htq {

// One face <c, r> = b of the capacity polyhedron, with an anchor point in its
// relative interior and (optionally) the configured drift constant delta.
struct CapacityFace {
    std::vector<double> c;
    double b = 0.0;
    std::vector<double> anchor;
    std::optional<double> delta;

    double c_dot_c() const;
    // Throws unless c has a strictly positive entry and <c, anchor> = b (1e-9).
    void validate() const;
};

// Finite set of feasible integer service schedules.
struct ServiceSet {
    std::vector<std::vector<std::int64_t>> schedules;
};

enum class DispatchRule { Jsq, Random };

struct FaceValidation {
    bool all_within = false;              // every schedule satisfies <c,S> <= b
    std::vector<std::size_t> violating;   // schedules with <c,S> > b
    std::vector<std::size_t> on_face;     // schedules attaining equality
    bool anchor_in_hull = false;          // anchor is a convex combination of face schedules
};

// All a_total arrivals go to one shortest queue; ties broken uniformly.
std::vector<std::int64_t> dispatch_jsq(const std::vector<std::int64_t>& q, std::int64_t a_total,
                                       Rng& rng);

// Each arrival picks a queue independently and uniformly.
std::vector<std::int64_t> dispatch_random(const std::vector<std::int64_t>& q,
                                          std::int64_t a_total, Rng& rng);

// Index of a schedule attaining max <q, S>; ties broken uniformly.
std::size_t maxweight_index(const std::vector<std::int64_t>& q, const ServiceSet& sset, Rng& rng);

inline std::vector<std::int64_t> maxweight(const std::vector<std::int64_t>& q,
                                           const ServiceSet& sset, Rng& rng) {
    return sset.schedules[maxweight_index(q, sset, rng)];
}

// The set of maximizer indices (deterministic; used by the scale-invariance tests).
std::vector<std::size_t> maxweight_argmax_set(const std::vector<std::int64_t>& q,
                                              const ServiceSet& sset);

// lambda^(eps) = anchor - eps * c; throws if any component goes negative.
std::vector<double> heavy_arrival_rates(const CapacityFace& face, double epsilon);

// q = q_par + q_perp with q_par the projection onto c.
std::pair<std::vector<double>, std::vector<double>> project_onto_face(
    const std::vector<double>& q, const CapacityFace& face);

// Checks <c,S> <= b over the set, collects the face's schedules, and tests
// anchor membership in their convex hull (small phase-1 simplex).
// Throws ValidationError if no schedule attains equality.
FaceValidation validate_face(const ServiceSet& sset, const CapacityFace& face);

}  // namespace htq
