#include "htq/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "htq/control.hpp"
#include "htq/dynamics.hpp"
#include "htq/errors.hpp"

namespace htq {

namespace {

double t_quantile_975(std::uint32_t batches) {
    boost::math::students_t dist(static_cast<double>(batches - 1));
    return boost::math::quantile(dist, 0.975);
}

StatCI batch_ci(const std::vector<double>& batch_sums, double batch_len, double tq) {
    const std::size_t b = batch_sums.size();
    double mean = 0.0;
    for (double s : batch_sums) mean += s / batch_len;
    mean /= static_cast<double>(b);
    double var = 0.0;
    for (double s : batch_sums) {
        const double d = s / batch_len - mean;
        var += d * d;
    }
    var /= static_cast<double>(b - 1);
    return StatCI{mean, tq * std::sqrt(var / static_cast<double>(b))};
}

constexpr double kFaceTol = 1e-9;

}  // namespace

void EstimatorConfig::validate() const {
    if (horizon == 0) throw ValidationError("estimator: horizon must be positive");
    if (batch_count < 10) throw ValidationError("estimator: batch_count must be >= 10");
    if (thinning == 0) throw ValidationError("estimator: thinning must be positive");
    if (sample_cap == 0) throw ValidationError("estimator: sample_cap must be positive");
    if (burn_in && (*burn_in == 0 || *burn_in >= horizon))
        throw ValidationError("estimator: burn_in must be positive and smaller than horizon");
}

std::uint64_t EstimatorConfig::effective_burn_in(double epsilon) const {
    if (burn_in) return *burn_in;
    // heavy-traffic relaxation time scales as eps^-2
    const double suggested = std::ceil(20.0 / (epsilon * epsilon));
    const auto cap = horizon / 4;
    auto b = static_cast<std::uint64_t>(std::min(suggested, static_cast<double>(cap)));
    return std::max<std::uint64_t>(b, 1);
}

SteadyStateEstimate run_steady_state(const SystemSpec& spec, const EstimatorConfig& cfg) {
    cfg.validate();
    if (spec.epsilon <= 0.0)
        throw ValidationError("run_steady_state: spec.epsilon must be > 0 for a stable run");
    const std::size_t n = static_cast<std::size_t>(spec.n);
    const double eps = spec.epsilon;

    SteadyStateEstimate est;
    est.epsilon = eps;
    est.horizon = cfg.horizon;
    est.burn_in = cfg.effective_burn_in(eps);
    est.seed = cfg.seed;
    est.target_rate = spec.target_rate();
    est.scheduled = spec.kind == SystemKind::Schedule;
    est.has_face = spec.face.has_value();

    const std::vector<double> w = spec.weights();
    const std::uint64_t total_post = cfg.horizon - est.burn_in;
    if (total_post < cfg.batch_count)
        throw ValidationError("run_steady_state: horizon too small for batch count");
    const std::uint64_t batch_len = total_post / cfg.batch_count;
    const std::uint64_t used = batch_len * cfg.batch_count;
    est.slots_used = used;
    const std::uint64_t thin =
        std::max<std::uint64_t>(cfg.thinning, (used + cfg.sample_cap - 1) / cfg.sample_cap);

    // face geometry (perp component, saturation); the drift bookkeeping for
    // non-scheduled runs always balances <1,S> against mu_Sigma
    const CapacityFace* face = spec.face ? &*spec.face : nullptr;
    if (est.scheduled && (!face || spec.sset.schedules.empty()))
        throw ValidationError("run_steady_state: scheduled system needs a face and a service set");
    double cc = 1.0;
    if (face) {
        cc = face->c_dot_c();
        est.c_dot_c = cc;
    }
    est.face_b = est.scheduled ? face->b : spec.mu_sigma();

    // scheduled runs: precompute <c,S_i> per schedule
    std::vector<double> cs_of_schedule;
    std::vector<bool> on_face;
    if (est.scheduled) {
        for (const auto& s : spec.sset.schedules) {
            double v = 0.0;
            for (std::size_t i = 0; i < n; ++i) v += w[i] * static_cast<double>(s[i]);
            cs_of_schedule.push_back(v);
            on_face.push_back(std::abs(v - face->b) <= kFaceTol);
        }
        est.sched_cs = cs_of_schedule;
        est.sched_counts.assign(cs_of_schedule.size(), 0);
    }

    Rng rng = Rng::stream(cfg.seed, cfg.stream_index);

    const std::uint32_t nb = cfg.batch_count;
    std::vector<double> bx(nb, 0.0), bu(nb, 0.0), bu2(nb, 0.0), bcross(nb, 0.0), bcs(nb, 0.0),
        bp1(nb, 0.0), bp2(nb, 0.0);
    std::uint64_t face_hits = 0;

    std::vector<std::int64_t> q(n, 0), avec(n, 0), svec(n, 0);
    double x_curr = 0.0;

    // empirical fallback for the face drift constant
    const bool estimate_delta = face && !face->delta;
    // condition on states more than one slot's reach away from the subspace
    const double delta_threshold =
        std::sqrt(static_cast<double>(n)) *
        static_cast<double>(std::max(spec.a_max(), spec.s_max()));
    double prev_perp = -1.0;
    double delta_drift_sum = 0.0;
    std::uint64_t delta_drift_count = 0;

    est.scaled_samples.reserve(std::min<std::uint64_t>(cfg.sample_cap, used / thin + 1));
    if (face) est.perp_samples.reserve(est.scaled_samples.capacity());

    std::uint64_t batch = 0, in_batch = 0, since_thin = 0;
    for (std::uint64_t t = 0; t < cfg.horizon; ++t) {
        const bool accounted = t >= est.burn_in && t < est.burn_in + used;

        double perp_norm = 0.0;
        if (accounted && face) {
            double qq = 0.0, cq = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double qi = static_cast<double>(q[i]);
                qq += qi * qi;
                cq += face->c[i] * qi;
            }
            perp_norm = std::sqrt(std::max(0.0, qq - cq * cq / cc));
        }
        if (accounted) {
            if (since_thin == 0 && est.scaled_samples.size() < cfg.sample_cap) {
                est.scaled_samples.push_back(eps * x_curr);
                if (face) est.perp_samples.push_back(perp_norm);
            }
            if (++since_thin == thin) since_thin = 0;
            if (estimate_delta) {
                if (prev_perp >= delta_threshold) {
                    delta_drift_sum += perp_norm - prev_perp;
                    ++delta_drift_count;
                }
                prev_perp = perp_norm;
            }
        } else {
            prev_perp = -1.0;
        }

        // control decision from the pre-slot state, then arrivals and service
        double cs = 0.0;
        switch (spec.kind) {
            case SystemKind::SingleServer:
                avec[0] = spec.arrival_total.sample(rng);
                svec[0] = spec.service[0].sample(rng);
                cs = static_cast<double>(svec[0]);
                break;
            case SystemKind::LoadBalance: {
                const std::int64_t a_total = spec.arrival_total.sample(rng);
                if (spec.rule == DispatchRule::Jsq) {
                    std::fill(avec.begin(), avec.end(), 0);
                    // inline JSQ to avoid the per-slot allocation of dispatch_jsq
                    std::int64_t qmin = q[0];
                    for (std::size_t i = 1; i < n; ++i) qmin = std::min(qmin, q[i]);
                    std::size_t ties = 0, chosen = 0;
                    for (std::size_t i = 0; i < n; ++i)
                        if (q[i] == qmin && ties++ == 0) chosen = i;
                    if (ties > 1) {
                        std::uint64_t pick = rng.next_below(ties);
                        for (std::size_t i = 0; i < n; ++i)
                            if (q[i] == qmin && pick-- == 0) { chosen = i; break; }
                    }
                    avec[chosen] = a_total;
                } else {
                    std::fill(avec.begin(), avec.end(), 0);
                    for (std::int64_t k = 0; k < a_total; ++k) ++avec[rng.next_below(n)];
                }
                for (std::size_t i = 0; i < n; ++i) {
                    svec[i] = spec.service[i].sample(rng);
                    cs += static_cast<double>(svec[i]);
                }
                break;
            }
            case SystemKind::Schedule: {
                for (std::size_t i = 0; i < n; ++i) avec[i] = spec.arrivals[i].sample(rng);
                // allocation-free maxweight with the same tie-break draws
                const auto& schedules = spec.sset.schedules;
                std::int64_t best_w = 0;
                std::size_t ties = 0, idx = 0;
                for (std::size_t k = 0; k < schedules.size(); ++k) {
                    std::int64_t wgt = 0;
                    for (std::size_t i = 0; i < n; ++i) wgt += q[i] * schedules[k][i];
                    if (ties == 0 || wgt > best_w) {
                        best_w = wgt;
                        ties = 0;
                        idx = k;
                    }
                    if (wgt == best_w) ++ties;
                }
                if (ties > 1) {
                    std::uint64_t pick = rng.next_below(ties);
                    for (std::size_t k = idx; k < schedules.size(); ++k) {
                        std::int64_t wgt = 0;
                        for (std::size_t i = 0; i < n; ++i) wgt += q[i] * schedules[k][i];
                        if (wgt == best_w && pick-- == 0) { idx = k; break; }
                    }
                }
                svec = schedules[idx];
                cs = cs_of_schedule[idx];
                if (accounted) {
                    ++est.sched_counts[idx];
                    if (on_face[idx]) ++face_hits;
                }
                break;
            }
        }
        if (!est.scheduled && accounted && face) {
            // saturation against the declared face for non-scheduled runs
            double v = 0.0;
            for (std::size_t i = 0; i < n; ++i) v += face->c[i] * static_cast<double>(svec[i]);
            if (std::abs(v - face->b) <= kFaceTol) ++face_hits;
        }

        double u_stat = 0.0, x_next = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::int64_t u = std::max<std::int64_t>(svec[i] - avec[i] - q[i], 0);
            const std::int64_t qn = q[i] + avec[i] - svec[i] + u;
            if (u != 0 && qn != 0) ++est.violations;
            if (qn > cfg.guard)
                throw NumericalError("run_steady_state: queue " + std::to_string(i) +
                                     " exceeded guard " + std::to_string(cfg.guard) +
                                     " (divergent run at epsilon=" + std::to_string(eps) + ")");
            q[i] = qn;
            u_stat += w[i] * static_cast<double>(u);
            x_next += w[i] * static_cast<double>(qn);
        }

        if (accounted) {
            bx[batch] += x_curr;
            bu[batch] += u_stat;
            bu2[batch] += u_stat * u_stat;
            bcross[batch] += u_stat * x_next;
            bcs[batch] += cs;
            if (face) {
                bp1[batch] += perp_norm;
                bp2[batch] += perp_norm * perp_norm;
            }
            if (++in_batch == batch_len) {
                in_batch = 0;
                ++batch;
            }
        }
        x_curr = x_next;
    }

    const double len = static_cast<double>(batch_len);
    const double tq = t_quantile_975(nb);
    StatCI mx = batch_ci(bx, len, tq);
    est.mean_scaled = StatCI{eps * mx.mean, eps * mx.half};
    est.mean_unscaled = mx.mean;
    est.mean_u = batch_ci(bu, len, tq);
    est.mean_u2 = batch_ci(bu2, len, tq);
    est.cross_term = batch_ci(bcross, len, tq);
    {
        // <w,U> + (b - <w,S>): zero-drift identity target eps * <c,c>
        std::vector<double> comb(nb);
        for (std::uint32_t i = 0; i < nb; ++i) comb[i] = bu[i] + est.face_b * len - bcs[i];
        est.combined_drift = batch_ci(comb, len, tq);
    }
    if (face) {
        est.perp_moments[1] = batch_ci(bp1, len, tq);
        est.perp_moments[2] = batch_ci(bp2, len, tq);
    } else {
        // no declared face: for n = 1 the perpendicular component is identically 0
        est.perp_moments[1] = StatCI{0.0, 0.0};
        est.perp_moments[2] = StatCI{0.0, 0.0};
    }
    est.face_saturation =
        (est.scheduled || face) ? static_cast<double>(face_hits) / static_cast<double>(used) : 1.0;
    if (face) {
        if (face->delta) {
            est.delta = *face->delta;
        } else if (delta_drift_count > 0) {
            est.delta = std::max(0.0, -delta_drift_sum / static_cast<double>(delta_drift_count));
            est.delta_estimated = true;
            est.delta_samples = delta_drift_count;
        }
    }
    return est;
}

double wasserstein_to_exp(std::vector<double> samples, double rate) {
    if (samples.empty()) throw ValidationError("wasserstein_to_exp: empty sample set");
    if (rate <= 0.0) throw ValidationError("wasserstein_to_exp: rate must be > 0");
    for (double v : samples)
        if (v < 0.0 || !std::isfinite(v))
            throw ValidationError("wasserstein_to_exp: samples must be finite and >= 0");
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();

    // On [a,b) the empirical CDF is p = i/n and g(t) = p - 1 + e^{-rate t} is
    // decreasing with root t* = -log(1-p)/rate; antiderivative of g is
    // G(t) = (p-1) t - e^{-rate t}/rate.
    double total = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double a = (i == 0) ? 0.0 : samples[i - 1];
        if (i == n) {
            total += std::exp(-rate * a) / rate;
            break;
        }
        const double b = samples[i];
        if (b <= a) continue;
        const double p = static_cast<double>(i) / static_cast<double>(n);
        auto seg = [&](double lo, double hi) {
            // integral of g over [lo,hi]
            return (p - 1.0) * (hi - lo) - (std::exp(-rate * hi) - std::exp(-rate * lo)) / rate;
        };
        const double tstar = -std::log1p(-p) / rate;
        if (tstar <= a) {
            total -= seg(a, b);
        } else if (tstar >= b) {
            total += seg(a, b);
        } else {
            total += seg(a, tstar) - seg(tstar, b);
        }
    }
    return total;
}

DriftReport drift_identities(const SteadyStateEstimate& est, double epsilon) {
    DriftReport rep;
    rep.epsilon = epsilon;
    rep.mean_u = est.mean_u;
    rep.violations = est.violations;
    rep.cross_term = est.cross_term;
    rep.scheduled = est.scheduled;
    rep.mean_u_contains_eps = est.mean_u.contains(epsilon);
    rep.drift_gap = est.scheduled ? epsilon * est.c_dot_c : epsilon;
    rep.combined = est.combined_drift;
    rep.combined_contains_gap = est.combined_drift.contains(rep.drift_gap);
    rep.u_upper_ok = est.mean_u.mean <= rep.drift_gap + est.mean_u.half;
    return rep;
}

U2Threshold u_squared_threshold(double epsilon, const LightTailCert& cert,
                                double fourth_moment_s) {
    if (epsilon <= 0.0) throw ValidationError("u_squared_threshold: epsilon must be > 0");
    if (cert.theta <= 0.0 || cert.bound <= 0.0)
        throw ValidationError("u_squared_threshold: invalid light-tail certificate");
    if (fourth_moment_s < 0.0)
        throw ValidationError("u_squared_threshold: fourth moment must be >= 0");
    U2Threshold out;
    out.s_prime = std::log(cert.bound / (epsilon * epsilon)) / cert.theta;
    if (out.s_prime < 0.0) {
        out.s_prime = 0.0;
        out.clamped = true;
    }
    out.bound = epsilon * out.s_prime +
                std::sqrt(fourth_moment_s) *
                    std::sqrt(cert.bound * std::exp(-cert.theta * out.s_prime));
    return out;
}

std::map<int, StatCI> ssc_moments(const std::vector<double>& perp_samples,
                                  const std::vector<int>& orders, std::uint32_t batch_count) {
    std::map<int, StatCI> out;
    for (int r : orders) {
        if (r < 0) throw ValidationError("ssc_moments: order must be >= 0");
        if (r == 0) {
            out[0] = StatCI{1.0, 0.0};
            continue;
        }
        if (perp_samples.size() < batch_count)
            throw ValidationError("ssc_moments: not enough samples for batch means");
        const std::size_t len = perp_samples.size() / batch_count;
        std::vector<double> sums(batch_count, 0.0);
        for (std::size_t b = 0; b < batch_count; ++b)
            for (std::size_t k = 0; k < len; ++k)
                sums[b] += std::pow(perp_samples[b * len + k], r);
        out[r] = batch_ci(sums, static_cast<double>(len), t_quantile_975(batch_count));
    }
    return out;
}

}  // namespace htq
