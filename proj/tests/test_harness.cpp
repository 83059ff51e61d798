#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "htq/errors.hpp"
#include "htq/harness.hpp"
#include "htq/io.hpp"

using htq::RateFit;
using htq::SweepRow;

namespace {

htq::SystemTemplate bernoulli_single_template() {
    htq::SystemTemplate tmpl;
    tmpl.kind = htq::SystemKind::SingleServer;
    tmpl.n = 1;
    tmpl.arrival = htq::DistSpec{htq::DistSpec::Family::Bernoulli};
    tmpl.service = {htq::DistSpec{htq::DistSpec::Family::Bernoulli, 0.5}};
    return tmpl;
}

std::vector<SweepRow> synthetic_rows(double k, bool eps_log) {
    std::vector<SweepRow> rows;
    for (double eps : {0.2, 0.1, 0.05}) {
        SweepRow r;
        r.epsilon = eps;
        r.dw = eps_log ? k * eps * std::log(1.0 / eps) : k * eps;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace

TEST_CASE("fit_rate recovers exact synthetic rates") {
    auto lin = htq::fit_rate(synthetic_rows(0.3, false), RateFit::Model::Linear);
    CHECK(std::abs(lin.K - 0.3) <= 1e-12);
    CHECK(lin.r2 >= 1.0 - 1e-12);

    auto elog = htq::fit_rate(synthetic_rows(1.0, true), RateFit::Model::EpsLog);
    CHECK(std::abs(elog.K - 1.0) <= 1e-12);
    CHECK(elog.r2 >= 1.0 - 1e-12);

    CHECK_THROWS_AS(htq::fit_rate({synthetic_rows(0.3, false)[0]}, RateFit::Model::Linear),
                    htq::ValidationError);
}

TEST_CASE("ssc_bound_constants worked example") {
    const auto c = htq::ssc_bound_constants(2, 1, 1, 0.1, 1);
    CHECK(c.L == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(c.D == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(c.kappa == doctest::Approx(40.0).epsilon(1e-14));
    CHECK(c.eta == doctest::Approx(0.05).epsilon(1e-14));
    const double v1 = 240.0 + 4.0 * std::sqrt(2.0);
    CHECK(std::abs(c.V_r - v1) <= 1e-9);
    CHECK(std::abs(c.M_r_bound - v1) <= 1e-9);  // r = 1: r^(r+1/2) e^(1-r) = 1
    const double lemma2 = 80.0 + 4.0 * std::sqrt(2.0) * (std::sqrt(2.0) + 0.05) / 0.05;
    CHECK(c.drift_lemma_bound == doctest::Approx(lemma2).epsilon(1e-12));

    // V_1 decreases in delta
    CHECK(htq::ssc_bound_constants(2, 1, 1, 0.2, 1).V_r < c.V_r);
    CHECK_THROWS_AS(htq::ssc_bound_constants(2, 1, 1, 0.0, 1), htq::ValidationError);
    CHECK_THROWS_AS(htq::ssc_bound_constants(2, 1, 1, 0.1, 0), htq::ValidationError);
}

TEST_CASE("stirling factor dominates r!/e") {
    for (int r = 1; r <= 10; ++r) {
        double fact = 1.0;
        for (int k = 2; k <= r; ++k) fact *= k;
        CHECK(std::pow(r, r + 0.5) * std::exp(1.0 - r) >= fact / std::exp(1.0));
    }
}

TEST_CASE("ssc_empirical_check") {
    htq::SteadyStateEstimate est;
    est.perp_moments[1] = htq::StatCI{0.5, 0.01};
    est.perp_moments[2] = htq::StatCI{2.0, 0.05};
    const auto c1 = htq::ssc_bound_constants(2, 1, 1, 0.1, 1);
    auto chk = htq::ssc_empirical_check(est, c1, 1);
    CHECK(chk.pass);
    CHECK(chk.estimate == 0.5);
    auto chk2 = htq::ssc_empirical_check(est, c1, 2);  // bounds recomputed for r = 2
    CHECK(chk2.pass);
    CHECK(chk2.m_r_bound == doctest::Approx(htq::ssc_bound_constants(2, 1, 1, 0.1, 2).M_r_bound));
    CHECK(htq::ssc_empirical_check(est, c1, 0).pass);
    CHECK_THROWS_AS(htq::ssc_empirical_check(est, c1, 4), htq::ValidationError);
}

TEST_CASE("face_slack_stats definitional recomputation") {
    htq::SteadyStateEstimate est;
    est.scheduled = true;
    est.face_b = 1.0;
    est.sched_cs = {1.0, 1.0, 0.0};
    est.sched_counts = {450, 450, 100};
    auto stats = htq::face_slack_stats(est, 2.0);
    CHECK(stats.one_minus_pi == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(stats.slack_moment == doctest::Approx(0.1 * 1.0).epsilon(1e-14));

    // all schedules on the face
    htq::SteadyStateEstimate sat = est;
    sat.sched_cs = {1.0, 1.0, 1.0};
    auto s2 = htq::face_slack_stats(sat, 2.0);
    CHECK(s2.one_minus_pi == 0.0);
    CHECK(s2.slack_moment == 0.0);

    htq::SteadyStateEstimate notsched;
    CHECK_THROWS_AS(htq::face_slack_stats(notsched, 2.0), htq::ValidationError);
    CHECK_THROWS_AS(htq::face_slack_stats(est, 1.0), htq::ValidationError);
}

TEST_CASE("linear_fit recovers an exact line") {
    auto fit = htq::linear_fit({0.05, 0.1, 0.2}, {1.1, 1.2, 1.4});
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.r2 >= 1.0 - 1e-12);
    CHECK_THROWS_AS(htq::linear_fit({1.0}, {1.0}), htq::ValidationError);
}

TEST_CASE("sweep structure, determinism, and row arithmetic") {
    auto tmpl = bernoulli_single_template();
    htq::EstimatorConfig cfg;
    cfg.horizon = 200000;
    cfg.seed = 77;
    const std::vector<double> grid{0.1, 0.3, 0.05, 0.2};

    auto res = htq::sweep(tmpl, grid, cfg);
    REQUIRE(res.rows.size() == 4);
    CHECK(res.rows[0].epsilon == 0.3);  // sorted by decreasing epsilon
    CHECK(res.rows[1].epsilon == 0.2);
    CHECK(res.rows[2].epsilon == 0.1);
    CHECK(res.rows[3].epsilon == 0.05);
    for (const auto& row : res.rows) {
        CHECK(row.dw_over_eps == row.dw / row.epsilon);
        const double lambda = 0.5 - row.epsilon;
        const double rate = 2.0 / (lambda * (1.0 - lambda) + 0.25);
        CHECK(row.target_mean == doctest::Approx(1.0 / rate).epsilon(1e-12));
        CHECK(row.dw >= 0.0);
    }

    auto res2 = htq::sweep(tmpl, grid, cfg);
    CHECK(htq::sweep_csv(res) == htq::sweep_csv(res2));  // byte-identical

    CHECK_THROWS_AS(htq::sweep(tmpl, {}, cfg), htq::ValidationError);
}

TEST_CASE("sweep propagates divergence with the offending epsilon") {
    auto tmpl = bernoulli_single_template();
    htq::EstimatorConfig cfg;
    cfg.horizon = 400000;
    cfg.seed = 9;
    cfg.guard = 5;  // tiny guard forces a spurious divergence report
    try {
        htq::sweep(tmpl, {0.05}, cfg);
        FAIL("expected divergence");
    } catch (const htq::NumericalError& e) {
        CHECK(std::string(e.what()).find("0.05") != std::string::npos);
    }
}

TEST_CASE("sweep names the epsilon that cannot be instantiated") {
    auto tmpl = bernoulli_single_template();
    htq::EstimatorConfig cfg;
    cfg.horizon = 100000;
    try {
        htq::sweep(tmpl, {0.1, 0.6}, cfg);  // 0.6 exceeds the service rate
        FAIL("expected a validation error");
    } catch (const htq::ValidationError& e) {
        CHECK(std::string(e.what()).find("0.6") != std::string::npos);
    }
}

TEST_CASE("horizon rule scales points by 1/eps^2") {
    auto tmpl = bernoulli_single_template();
    htq::EstimatorConfig cfg;
    cfg.horizon = 500000;  // cap
    cfg.seed = 123;
    htq::HorizonRule rule{400.0, 100000};
    auto res = htq::sweep(tmpl, {0.2, 0.02}, cfg, rule);
    CHECK(res.runs[0].horizon == 100000);  // 400/0.04 = 10000 -> floor at min
    CHECK(res.runs[1].horizon == 500000);  // 400/0.0004 = 1e6 -> capped
}
