#include "htq/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "htq/errors.hpp"

namespace htq {

std::string to_string(RateFit::Model model) {
    return model == RateFit::Model::Linear ? "linear" : "eps_log";
}

SweepResult sweep(const SystemTemplate& tmpl, const std::vector<double>& eps_grid,
                  const EstimatorConfig& cfg, const std::optional<HorizonRule>& rule) {
    if (eps_grid.empty()) throw ValidationError("sweep: empty epsilon grid");
    std::vector<double> grid = eps_grid;
    std::sort(grid.begin(), grid.end(), std::greater<>());

    auto horizon_for = [&](double eps) -> std::uint64_t {
        if (!rule || rule->coeff <= 0.0) return cfg.horizon;
        const double suggested = std::ceil(rule->coeff / (eps * eps));
        auto h = static_cast<std::uint64_t>(
            std::min(suggested, static_cast<double>(cfg.horizon)));
        return std::max(h, rule->min_horizon);
    };

    // one rng stream per grid position; merge order is canonical (sorted grid)
    std::vector<std::future<SteadyStateEstimate>> futures;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        futures.push_back(std::async(std::launch::async, [&, i]() {
            EstimatorConfig point_cfg = cfg;
            point_cfg.stream_index = i;
            point_cfg.horizon = horizon_for(grid[i]);
            const SystemSpec spec = tmpl.instantiate(grid[i]);
            return run_steady_state(spec, point_cfg);
        }));
    }

    SweepResult result;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        SteadyStateEstimate est;
        try {
            est = futures[i].get();
        } catch (const NumericalError& e) {
            throw NumericalError("sweep: run at epsilon=" + std::to_string(grid[i]) +
                                 " failed: " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError("sweep: epsilon=" + std::to_string(grid[i]) +
                                  " is not runnable: " + e.what());
        }
        const double dw = wasserstein_to_exp(est.scaled_samples, est.target_rate);
        SweepRow row;
        row.epsilon = grid[i];
        row.dw = dw;
        row.dw_over_eps = dw / grid[i];
        row.mean_scaled = est.mean_scaled.mean;
        row.target_mean = 1.0 / est.target_rate;
        row.mean_u = est.mean_u.mean;
        row.mean_u2 = est.mean_u2.mean;
        row.cross_term = est.cross_term.mean;
        row.face_saturation = est.face_saturation;
        row.perp_m2 = est.perp_moments.at(2).mean;
        result.rows.push_back(row);
        result.runs.push_back(std::move(est));
    }
    if (result.rows.size() >= 2) {
        result.fit_linear = fit_rate(result.rows, RateFit::Model::Linear);
        result.fit_eps_log = fit_rate(result.rows, RateFit::Model::EpsLog);
    }
    return result;
}

RateFit fit_rate(const std::vector<SweepRow>& rows, RateFit::Model model) {
    if (rows.size() < 2) throw ValidationError("fit_rate: need at least 2 rows");
    double sxy = 0.0, sxx = 0.0, sy = 0.0;
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        const double x = model == RateFit::Model::Linear ? r.epsilon
                                                         : r.epsilon * std::log(1.0 / r.epsilon);
        xs.push_back(x);
        ys.push_back(r.dw);
        sxy += x * r.dw;
        sxx += x * x;
        sy += r.dw;
    }
    RateFit fit;
    fit.model = model;
    fit.K = sxy / sxx;
    const double ybar = sy / static_cast<double>(rows.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        ss_res += (ys[i] - fit.K * xs[i]) * (ys[i] - fit.K * xs[i]);
        ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    return fit;
}

SscBoundConstants ssc_bound_constants(int n, std::int64_t a_max, std::int64_t s_max, double delta,
                                      int r) {
    if (delta <= 0.0) throw ValidationError("ssc_bound_constants: delta must be > 0");
    if (n < 1) throw ValidationError("ssc_bound_constants: n must be >= 1");
    if (r < 1 || r > 150) throw ValidationError("ssc_bound_constants: r out of range");
    SscBoundConstants c;
    c.n = n;
    c.a_max = a_max;
    c.s_max = s_max;
    c.delta = delta;
    c.r = r;
    const double m = static_cast<double>(std::max(a_max, s_max));
    c.L = static_cast<double>(n) * m * m;
    c.D = std::sqrt(static_cast<double>(n)) * m;
    c.kappa = 2.0 * c.L / delta;
    c.eta = delta / 2.0;
    c.V_r = std::pow(4.0 * c.L / delta + (8.0 * c.D * c.D + 4.0 * c.D * delta) / delta,
                     static_cast<double>(r));
    c.M_r_bound = c.V_r * std::pow(static_cast<double>(r), r + 0.5) * std::exp(1.0 - r);
    double r_fact = 1.0;
    for (int k = 2; k <= r; ++k) r_fact *= k;
    c.drift_lemma_bound = std::pow(2.0 * c.kappa, r) +
                     std::pow(4.0 * c.D, r) * std::pow((c.D + c.eta) / c.eta, r) * r_fact;
    return c;
}

SscCheck ssc_empirical_check(const SteadyStateEstimate& est, const SscBoundConstants& consts,
                             int r) {
    SscCheck check;
    check.r = r;
    if (r == 0) {
        check.estimate = 1.0;
    } else {
        auto it = est.perp_moments.find(r);
        if (it == est.perp_moments.end())
            throw ValidationError("ssc_empirical_check: moment order " + std::to_string(r) +
                                  " not recorded in the estimate");
        check.estimate = it->second.mean;
    }
    if (consts.r != r) {
        const SscBoundConstants c =
            ssc_bound_constants(consts.n, consts.a_max, consts.s_max, consts.delta, std::max(r, 1));
        check.m_r_bound = c.M_r_bound;
        check.drift_lemma_bound = c.drift_lemma_bound;
    } else {
        check.m_r_bound = consts.M_r_bound;
        check.drift_lemma_bound = consts.drift_lemma_bound;
    }
    check.pass = check.estimate <= check.m_r_bound && check.estimate <= check.drift_lemma_bound;
    return check;
}

FaceSlackStats face_slack_stats(const SteadyStateEstimate& est, double rprime) {
    if (!est.scheduled || est.sched_counts.empty())
        throw ValidationError("face_slack_stats: estimate is not from a scheduled run");
    if (rprime <= 1.0) throw ValidationError("face_slack_stats: r' must be > 1");
    std::uint64_t total = 0, off = 0;
    double moment = 0.0;
    for (std::size_t i = 0; i < est.sched_counts.size(); ++i) {
        total += est.sched_counts[i];
        const double slack = est.face_b - est.sched_cs[i];
        if (std::abs(slack) > 1e-9) {
            off += est.sched_counts[i];
            moment += static_cast<double>(est.sched_counts[i]) * std::pow(slack, rprime);
        }
    }
    FaceSlackStats stats;
    stats.rprime = rprime;
    stats.one_minus_pi = static_cast<double>(off) / static_cast<double>(total);
    stats.slack_moment = moment / static_cast<double>(total);
    return stats;
}

LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ValidationError("linear_fit: need matching series with >= 2 points");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LinFit fit;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double pred = fit.intercept + fit.slope * x[i];
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - sy / n) * (y[i] - sy / n);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    return fit;
}

FaceSaturationReport face_saturation_check(const SweepResult& result, double rprime) {
    FaceSaturationReport rep;
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        rep.eps.push_back(result.rows[i].epsilon);
        rep.per_run.push_back(face_slack_stats(result.runs[i], rprime));
    }
    std::vector<double> pi_series, moment_series;
    for (const auto& s : rep.per_run) {
        pi_series.push_back(s.one_minus_pi);
        moment_series.push_back(s.slack_moment);
    }
    rep.pi_fit = linear_fit(rep.eps, pi_series);
    rep.moment_fit = linear_fit(rep.eps, moment_series);
    return rep;
}

}  // namespace htq
