// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "htq/control.hpp"
#include "htq/dynamics.hpp"
#include "htq/estimation.hpp"
#include "htq/harness.hpp"
#include "htq/io.hpp"
#include "htq/rng.hpp"
#include "htq/stein.hpp"
#include "htq/system.hpp"
#include "support/oracles.hpp"

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
    if (!ok) ++g_failures;
}

bool strictly_decreasing(const std::vector<htq::SweepRow>& rows) {
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].dw >= rows[i - 1].dw) return false;
    return true;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

htq::SystemTemplate single_server_template() {
    htq::SystemTemplate tmpl;
    tmpl.kind = htq::SystemKind::SingleServer;
    tmpl.n = 1;
    tmpl.arrival = htq::DistSpec{htq::DistSpec::Family::Bernoulli};
    tmpl.service = {htq::DistSpec{htq::DistSpec::Family::Bernoulli, 0.5}};
    return tmpl;
}

htq::SystemTemplate jsq_template() {
    htq::SystemTemplate tmpl;
    tmpl.kind = htq::SystemKind::LoadBalance;
    tmpl.n = 2;
    tmpl.rule = htq::DispatchRule::Jsq;
    htq::DistSpec arrival;
    arrival.family = htq::DistSpec::Family::Binomial;
    arrival.n = 2;
    tmpl.arrival = arrival;
    tmpl.service = {htq::DistSpec{htq::DistSpec::Family::Bernoulli, 0.5},
                    htq::DistSpec{htq::DistSpec::Family::Bernoulli, 0.5}};
    tmpl.face = htq::CapacityFace{{1.0, 1.0}, 1.0, {0.5, 0.5}, {}};
    return tmpl;
}

htq::SystemTemplate maxweight_template() {
    htq::SystemTemplate tmpl;
    tmpl.kind = htq::SystemKind::Schedule;
    tmpl.n = 2;
    tmpl.arrivals = {htq::DistSpec{htq::DistSpec::Family::Bernoulli},
                     htq::DistSpec{htq::DistSpec::Family::Bernoulli}};
    tmpl.sset.schedules = {{1, 0}, {0, 1}, {0, 0}};
    tmpl.face = htq::CapacityFace{{1.0, 1.0}, 1.0, {0.5, 0.5}, 0.1};
    return tmpl;
}

// ---- criteria ----

void criterion_1_and_2(const htq::SweepResult& ss) {
    // 1(a): at the heavy-traffic end of the grid the scaled mean sits within
    // 5% of sigma^2(eps)/2. (The relative gap is ~2 eps by the exact chain, so
    // only the smallest grid point can satisfy the band; see the exact-oracle
    // deviations printed below.)
    const auto& last = ss.rows.back();
    const double dev = std::abs(last.mean_scaled - last.target_mean) / last.target_mean;
    const bool a_ok = dev <= 0.05;

    const bool b_mono = strictly_decreasing(ss.rows);
    double rmin = 1e300, rmax = 0.0;
    for (const auto& row : ss.rows) {
        rmin = std::min(rmin, row.dw_over_eps);
        rmax = std::max(rmax, row.dw_over_eps);
    }
    const bool b_ratio = rmax / rmin <= 3.0;
    const bool c_ok = ss.fit_linear.r2 >= 0.9;

    report(1, a_ok && b_mono && b_ratio && c_ok,
           "single-server exponentiality: mean ratio dev " + fmt(100 * dev) + "% at eps " +
               fmt(last.epsilon) + " (<=5%), dw decreasing=" + (b_mono ? "yes" : "no") +
               ", dw/eps spread " + fmt(rmax / rmin) + " (<=3), linear fit r2 " +
               fmt(ss.fit_linear.r2) + " (>=0.9), K " + fmt(ss.fit_linear.K));

    // criterion 2: exact birth-death oracle at eps in {0.2, 0.05}
    bool ok2 = true;
    std::string detail2 = "birth-death oracle:";
    for (const auto& run : ss.runs) {
        if (std::abs(run.epsilon - 0.2) > 1e-12 && std::abs(run.epsilon - 0.05) > 1e-12) continue;
        const auto arrival = htq::DistModel::bernoulli(0.5 - run.epsilon);
        const auto service = htq::DistModel::bernoulli(0.5);
        const double exact = htq_test::stationary_mean(
            htq_test::single_server_stationary(arrival, service));
        const double ci = run.mean_scaled.half / run.epsilon;
        const bool inside = std::abs(run.mean_unscaled - exact) <= ci;
        ok2 = ok2 && inside;
        detail2 += " eps=" + fmt(run.epsilon) + " |est-exact|=" +
                   fmt(std::abs(run.mean_unscaled - exact)) + " ci=" + fmt(ci) +
                   (inside ? " ok;" : " MISS;");
    }
    report(2, ok2, detail2);

    // transparency: exact-chain deviation from the limit-law target at every point
    for (const auto& row : ss.rows) {
        const double exact_scaled = (0.5 - row.epsilon) * 0.5;  // eps E[q] = lambda (1 - mu)
        std::printf("        note: eps=%s exact eps*E[q]=%s target=%s gap=%s%%\n",
                    fmt(row.epsilon).c_str(), fmt(exact_scaled).c_str(),
                    fmt(row.target_mean).c_str(),
                    fmt(100 * std::abs(exact_scaled - row.target_mean) / row.target_mean).c_str());
    }
}

void criterion_3(const std::vector<const htq::SweepResult*>& sweeps) {
    bool ok = true;
    std::uint64_t total_violations = 0;
    std::string detail;
    for (const auto* sw : sweeps) {
        for (const auto& run : sw->runs) {
            const auto drift = htq::drift_identities(run, run.epsilon);
            total_violations += drift.violations;
            if (drift.violations != 0) ok = false;
            if (!drift.scheduled) {
                if (!drift.mean_u_contains_eps) {
                    ok = false;
                    detail += " mean_u miss at eps=" + fmt(run.epsilon) + ";";
                }
            } else {
                if (!drift.combined_contains_gap) {
                    ok = false;
                    detail += " combined drift miss at eps=" + fmt(run.epsilon) + ";";
                }
                if (!drift.u_upper_ok) {
                    ok = false;
                    detail += " u upper-bound miss at eps=" + fmt(run.epsilon) + ";";
                }
            }
        }
    }
    report(3, ok,
           "drift identities: orthogonality violations " + std::to_string(total_violations) +
               " (must be 0), E[u]=eps CIs and scheduled zero-drift identities hold" + detail);
}

void criterion_4() {
    using htq::TestFunction;
    const htq::SteinParams params{1.0, 1.0};
    auto sol = htq::solve_stein(TestFunction::identity(), params);
    double worst_f2 = 0.0;
    for (double v : sol.f2) worst_f2 = std::max(worst_f2, std::abs(v + 1.0));
    bool ok = worst_f2 <= 1e-6;

    htq::Rng rng(0xC4);
    double worst_slack = 1e300;
    for (int k = 0; k < 10; ++k) {
        auto h = TestFunction::random_lip1(rng, 6.0, 5);
        auto rep = htq::gradient_bounds_check(htq::solve_stein(h, params), h.lip);
        worst_slack = std::min({worst_slack, rep.slack_f1(), rep.slack_f2(), rep.slack_f3()});
    }
    ok = ok && worst_slack >= -1e-6;

    const double r1 = htq::characterizing_residual([](double) { return 1.0; },
                                                   [](double) { return 0.0; }, 1.0, params);
    const double r2 = htq::characterizing_residual([](double z) { return 2.0 * z; },
                                                   [](double) { return 2.0; }, 0.0, params);
    const double r3 = htq::characterizing_residual([](double z) { return 3.0 * z * z; },
                                                   [](double z) { return 6.0 * z; }, 0.0, params);
    const double rworst = std::max({std::abs(r1), std::abs(r2), std::abs(r3)});
    ok = ok && rworst <= 1e-8;

    report(4, ok,
           "Stein solver: sup|f''+1| " + fmt(worst_f2) + " (<=1e-6), min Lip(1) bound slack " +
               fmt(worst_slack) + " (>=-1e-6), max characterizing residual " + fmt(rworst) +
               " (<=1e-8)");
}

void criterion_5(const htq::SweepResult& jsq) {
    const bool mono = strictly_decreasing(jsq.rows);
    std::vector<double> eps, cross;
    for (const auto& row : jsq.rows) {
        eps.push_back(row.epsilon);
        cross.push_back(row.cross_term);
    }
    const auto fit = htq::linear_fit(eps, cross);
    const bool fit_ok = fit.slope > 0.0 && fit.r2 >= 0.8;
    report(5, mono && fit_ok,
           "JSQ: dw decreasing=" + std::string(mono ? "yes" : "no") + ", cross-term slope " +
               fmt(fit.slope) + " (>0) with r2 " + fmt(fit.r2) + " (>=0.8)");
}

void criterion_6(const htq::SweepResult& mw) {
    const bool mono = strictly_decreasing(mw.rows);

    double pmin = 1e300, pmax = 0.0;
    for (const auto& row : mw.rows) {
        pmin = std::min(pmin, row.perp_m2);
        pmax = std::max(pmax, row.perp_m2);
    }
    const bool ssc_flat = pmax / pmin < 2.0;

    const double growth = mw.runs.back().mean_unscaled / mw.runs.front().mean_unscaled;
    const bool grows = growth >= 2.0 && growth <= 8.0;  // about 1/eps across 0.2 -> 0.05

    const auto sat = htq::face_saturation_check(mw, 2.0);
    const bool sat_ok = sat.pi_fit.slope > 0.0 && sat.pi_fit.r2 >= 0.8;

    report(6, mono && ssc_flat && grows && sat_ok,
           "MaxWeight: dw decreasing=" + std::string(mono ? "yes" : "no") +
               ", perp m2 spread " + fmt(pmax / pmin) + " (<2), <c,Q> growth x" + fmt(growth) +
               " (in [2,8]), 1-pi slope " + fmt(sat.pi_fit.slope) + " r2 " + fmt(sat.pi_fit.r2) +
               " (>=0.8)");
}

void criterion_7(const htq::SweepResult& mw) {
    const auto c1 = htq::ssc_bound_constants(2, 1, 1, 0.1, 1);
    const double expected = 240.0 + 4.0 * std::sqrt(2.0);
    bool ok = std::abs(c1.V_r - expected) <= 1e-9 && std::abs(c1.M_r_bound - expected) <= 1e-9;

    double worst_margin = 1e300;
    for (const auto& run : mw.runs) {
        for (int r : {1, 2}) {
            const auto chk = htq::ssc_empirical_check(run, c1, r);
            ok = ok && chk.pass;
            worst_margin = std::min(worst_margin,
                                    std::min(chk.m_r_bound, chk.drift_lemma_bound) / chk.estimate);
        }
    }
    report(7, ok,
           "moment-bound constants: V_1 " + fmt(c1.V_r) + " (= " + fmt(expected) +
               " to 1e-9), empirical perp moments under bounds (min bound/estimate " +
               fmt(worst_margin) + ")");
}

void criterion_8() {
    bool ok = true;
    std::string detail;

    // dynamics invariants over >= 1e5 random steps
    {
        htq::Rng rng(0xD1CE);
        std::int64_t steps = 0;
        bool dyn_ok = true;
        while (steps < 100001) {
            const std::int64_t q = static_cast<std::int64_t>(rng.next_below(30));
            const std::int64_t a = static_cast<std::int64_t>(rng.next_below(5));
            const std::int64_t s = static_cast<std::int64_t>(rng.next_below(6));
            auto [qn, u] = htq::step_queue(q, a, s);
            dyn_ok = dyn_ok && qn >= 0 && u >= 0 && u <= s && u * qn == 0 &&
                     qn == q + a - s + u;
            ++steps;
        }
        ok = ok && dyn_ok;
        detail += std::string("dynamics invariants ") + (dyn_ok ? "ok" : "FAIL") + "; ";
    }

    // Wasserstein oracle values to 1e-9
    {
        const double d0 = htq::wasserstein_to_exp({0, 0, 0}, 2.0);
        const double d1 = htq::wasserstein_to_exp(std::vector<double>(5, 1.0), 1.0);
        const bool w_ok = std::abs(d0 - 0.5) <= 1e-9 &&
                          std::abs(d1 - 2.0 / std::exp(1.0)) <= 1e-9;
        ok = ok && w_ok;
        detail += std::string("wasserstein oracle values ") + (w_ok ? "ok" : "FAIL") + "; ";
    }

    // MaxWeight argmax scale invariance
    {
        htq::Rng rng(0xA5);
        htq::ServiceSet sset{{{2, 0}, {0, 2}, {1, 1}, {0, 0}}};
        bool mw_ok = true;
        for (int k = 0; k < 100; ++k) {
            std::vector<std::int64_t> q{static_cast<std::int64_t>(rng.next_below(12)),
                                        static_cast<std::int64_t>(rng.next_below(12))};
            std::vector<std::int64_t> q7{7 * q[0], 7 * q[1]};
            mw_ok = mw_ok &&
                    htq::maxweight_argmax_set(q, sset) == htq::maxweight_argmax_set(q7, sset);
        }
        ok = ok && mw_ok;
        detail += std::string("maxweight scale invariance ") + (mw_ok ? "ok" : "FAIL") + "; ";
    }

    // dispatch conservation
    {
        htq::Rng rng(0xBEEF);
        bool disp_ok = true;
        for (int k = 0; k < 1000; ++k) {
            std::vector<std::int64_t> q{static_cast<std::int64_t>(rng.next_below(9)),
                                        static_cast<std::int64_t>(rng.next_below(9)),
                                        static_cast<std::int64_t>(rng.next_below(9))};
            const std::int64_t a = static_cast<std::int64_t>(rng.next_below(7));
            auto v1 = htq::dispatch_jsq(q, a, rng);
            auto v2 = htq::dispatch_random(q, a, rng);
            disp_ok = disp_ok && v1[0] + v1[1] + v1[2] == a && v2[0] + v2[1] + v2[2] == a;
        }
        ok = ok && disp_ok;
        detail += std::string("dispatch conservation ") + (disp_ok ? "ok" : "FAIL") + "; ";
    }

    // determinism: byte-identical sweep output under a fixed seed
    {
        auto tmpl = single_server_template();
        htq::EstimatorConfig cfg;
        cfg.horizon = 200000;
        cfg.seed = 4242;
        auto r1 = htq::sweep(tmpl, {0.3, 0.2}, cfg);
        auto r2 = htq::sweep(tmpl, {0.3, 0.2}, cfg);
        const bool det_ok = htq::sweep_csv(r1) == htq::sweep_csv(r2);
        ok = ok && det_ok;
        detail += std::string("byte-identical outputs ") + (det_ok ? "ok" : "FAIL");
    }

    report(8, ok, "property suites: " + detail);
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");

    htq::EstimatorConfig ss_cfg;
    ss_cfg.horizon = 200'000'000;
    ss_cfg.seed = 1107;
    const htq::HorizonRule ss_rule{125000.0, 10'000'000};
    const auto ss = htq::sweep(single_server_template(), {0.2, 0.1, 0.05, 0.025}, ss_cfg, ss_rule);

    htq::EstimatorConfig jsq_cfg;
    jsq_cfg.horizon = 25'000'000;
    jsq_cfg.seed = 2206;
    const htq::HorizonRule par_rule{62500.0, 10'000'000};
    const auto jsq = htq::sweep(jsq_template(), {0.2, 0.1, 0.05}, jsq_cfg, par_rule);

    htq::EstimatorConfig mw_cfg;
    mw_cfg.horizon = 25'000'000;
    mw_cfg.seed = 3308;
    const auto mw = htq::sweep(maxweight_template(), {0.2, 0.1, 0.05}, mw_cfg, par_rule);

    criterion_1_and_2(ss);
    criterion_3({&ss, &jsq, &mw});
    criterion_4();
    criterion_5(jsq);
    criterion_6(mw);
    criterion_7(mw);
    criterion_8();

    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
    } else {
        std::printf("%d criterion(s) failed\n", g_failures);
    }
    return g_failures;
}
