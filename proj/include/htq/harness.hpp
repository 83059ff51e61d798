#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "htq/estimation.hpp"
#include "htq/system.hpp"

namespace htq {

struct SweepRow {
    double epsilon = 0.0;
    double dw = 0.0;
    double dw_over_eps = 0.0;
    double mean_scaled = 0.0;
    double target_mean = 0.0;
    double mean_u = 0.0;
    double mean_u2 = 0.0;
    double cross_term = 0.0;
    double face_saturation = 1.0;
    double perp_m2 = 0.0;
};

struct RateFit {
    enum class Model { Linear, EpsLog };
    Model model = Model::Linear;
    double K = 0.0;   // least-squares slope through the origin
    double r2 = 0.0;  // coefficient of determination (centered)
};

std::string to_string(RateFit::Model model);

struct SweepResult {
    std::vector<SweepRow> rows;                // sorted by decreasing epsilon
    RateFit fit_linear;
    RateFit fit_eps_log;
    std::vector<SteadyStateEstimate> runs;     // parallel to rows
};

// Optional per-point horizon rule: horizon(eps) = clamp(coeff/eps^2, min, cfg.horizon).
struct HorizonRule {
    double coeff = 0.0;
    std::uint64_t min_horizon = 0;
};

// Instantiates the template at every grid epsilon, runs the steady-state
// estimator (grid points on separate rng streams, run concurrently), and
// evaluates d_W of the scaled samples against the limit law's target rate.
SweepResult sweep(const SystemTemplate& tmpl, const std::vector<double>& eps_grid,
                  const EstimatorConfig& cfg, const std::optional<HorizonRule>& rule = {});

// Least-squares fit of dw against eps (Linear) or eps*log(1/eps) (EpsLog),
// through the origin. Needs >= 2 rows.
RateFit fit_rate(const std::vector<SweepRow>& rows, RateFit::Model model);

struct SscBoundConstants {
    int n = 0;
    std::int64_t a_max = 0, s_max = 0;
    double delta = 0.0;
    int r = 1;
    double L = 0.0;       // N * max(A_max, S_max)^2
    double D = 0.0;       // sqrt(N) * max(A_max, S_max)
    double kappa = 0.0;   // 2L / delta
    double eta = 0.0;     // delta / 2
    double V_r = 0.0;     // (4L/delta + (8D^2 + 4 D delta)/delta)^r
    double M_r_bound = 0.0;     // V_r * r^(r+1/2) * e^(1-r)
    double drift_lemma_bound = 0.0;  // (2 kappa)^r + (4D)^r ((D+eta)/eta)^r r!
};

SscBoundConstants ssc_bound_constants(int n, std::int64_t a_max, std::int64_t s_max, double delta,
                                      int r);

struct SscCheck {
    int r = 1;
    double estimate = 0.0;
    double m_r_bound = 0.0;
    double drift_lemma_bound = 0.0;
    bool pass = false;  // estimate <= both bounds
};

SscCheck ssc_empirical_check(const SteadyStateEstimate& est, const SscBoundConstants& consts,
                             int r);

// Per-run face-saturation statistics for the scaling checks.
struct FaceSlackStats {
    double one_minus_pi = 0.0;   // 1 - P(<c,S> = b)
    double slack_moment = 0.0;   // E[(b - <c,S>)^r']
    double rprime = 2.0;
};

FaceSlackStats face_slack_stats(const SteadyStateEstimate& est, double rprime);

struct LinFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct FaceSaturationReport {
    std::vector<double> eps;
    std::vector<FaceSlackStats> per_run;
    LinFit pi_fit;       // 1 - pi_hat vs eps
    LinFit moment_fit;   // slack moment vs eps
    bool linear_in_eps(double min_r2 = 0.9) const {
        return pi_fit.slope > 0.0 && pi_fit.r2 >= min_r2 && moment_fit.slope > 0.0 &&
               moment_fit.r2 >= min_r2;
    }
};

// Aggregates face_slack_stats across a sweep and fits both series against eps.
FaceSaturationReport face_saturation_check(const SweepResult& result, double rprime);

}  // namespace htq
