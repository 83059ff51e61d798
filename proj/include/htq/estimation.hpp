#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "htq/distributions.hpp"
#include "htq/system.hpp"

namespace htq {

struct EstimatorConfig {
    std::uint64_t horizon = 10'000'000;
    std::optional<std::uint64_t> burn_in;  // default: ceil(20/eps^2), capped at horizon/4
    std::uint32_t batch_count = 32;
    std::uint64_t seed = 1;
    std::uint64_t thinning = 1;
    std::uint64_t sample_cap = 1u << 20;   // reservoir bound for thinned samples
    std::int64_t guard = 1'000'000'000;    // divergence guard per queue
    std::uint64_t stream_index = 0;        // rng stream (grid position in sweeps)

    void validate() const;
    std::uint64_t effective_burn_in(double epsilon) const;
};

// Point estimate with a batch-means confidence half-width (95%, Student-t).
struct StatCI {
    double mean = 0.0;
    double half = 0.0;
    bool contains(double v) const { return mean - half <= v && v <= mean + half; }
};

struct SteadyStateEstimate {
    double epsilon = 0.0;
    std::uint64_t horizon = 0;
    std::uint64_t burn_in = 0;
    std::uint64_t slots_used = 0;   // accounted slots (batch_count whole batches)
    std::uint64_t seed = 0;
    double target_rate = 0.0;       // limit-law rate for this system

    StatCI mean_scaled;             // eps * <w, Q>
    double mean_unscaled = 0.0;
    StatCI mean_u;                  // <w, U>
    StatCI mean_u2;
    StatCI cross_term;              // <w, U(t)> * <w, Q(t+1)>
    StatCI combined_drift;          // <w,U> + (b - <w,S>) for scheduled runs
    std::map<int, StatCI> perp_moments;
    double face_saturation = 1.0;   // fraction of slots with <c, S(t)> = b
    std::uint64_t violations = 0;   // count of u_n(t) * q_n(t+1) != 0 over the full horizon

    std::vector<double> scaled_samples;  // thinned eps * <w, Q(t)>
    std::vector<double> perp_samples;    // thinned ||Q_perp(t)|| (runs with a face)

    // per-schedule accounting for scheduled runs
    std::vector<double> sched_cs;          // <c, S_i> per schedule
    std::vector<std::uint64_t> sched_counts;

    bool scheduled = false;
    bool has_face = false;
    double face_b = 0.0;
    double c_dot_c = 1.0;

    // drift constant of the face: configured, or measured as the mean decrease
    // of ||Q_perp|| per slot while ||Q_perp|| >= sqrt(N) max(A_max, S_max)
    double delta = 0.0;
    bool delta_estimated = false;
    std::uint64_t delta_samples = 0;
};

// Simulates `horizon` slots from the empty state, discards the burn-in, and
// accumulates batch-means statistics. Pure function of (spec, cfg).
// Throws NumericalError when a queue exceeds cfg.guard.
SteadyStateEstimate run_steady_state(const SystemSpec& spec, const EstimatorConfig& cfg);

// Exact L1 distance between the empirical CDF of `samples` and the CDF of
// Exp(rate): piecewise-analytic over the sorted-sample intervals, splitting
// each interval at the crossing point of the two CDFs.
double wasserstein_to_exp(std::vector<double> samples, double rate);

struct DriftReport {
    double epsilon = 0.0;
    StatCI mean_u;
    std::uint64_t violations = 0;
    StatCI cross_term;
    bool scheduled = false;
    // single-server / load-balancing: E[u] = eps exactly in steady state
    bool mean_u_contains_eps = false;
    // scheduling: <c,U> + (b - <c,S>) has mean eps * <c,c> exactly
    double drift_gap = 0.0;
    StatCI combined;
    bool combined_contains_gap = false;
    bool u_upper_ok = false;  // mean_u <= drift_gap (within CI slack)
    bool ok() const {
        return violations == 0 && (scheduled ? combined_contains_gap : mean_u_contains_eps);
    }
};

DriftReport drift_identities(const SteadyStateEstimate& est, double epsilon);

struct U2Threshold {
    double s_prime = 0.0;
    double bound = 0.0;
    bool clamped = false;  // eps^2 >= D2 forced s' to 0
};

// s' = log(D2 / eps^2) / theta2 and the tail bound
// eps * s' + sqrt(E[s^4]) * sqrt(D2 * e^{-theta2 s'}).
U2Threshold u_squared_threshold(double epsilon, const LightTailCert& cert,
                                double fourth_moment_s);

// Batch-means estimates of E||Q_perp||^r from a thinned stationary series.
std::map<int, StatCI> ssc_moments(const std::vector<double>& perp_samples,
                                  const std::vector<int>& orders, std::uint32_t batch_count = 32);

}  // namespace htq
