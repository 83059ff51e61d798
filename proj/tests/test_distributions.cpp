#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "htq/distributions.hpp"
#include "htq/errors.hpp"
#include "htq/rng.hpp"

using htq::DistModel;
using htq::Rng;

TEST_CASE("make_discrete_dist computes exact moments") {
    auto d = DistModel::from_pmf({{0, 0.5}, {1, 0.5}});
    CHECK(d.mean() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(d.variance() == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(d.max_support() == 1);

    auto b = DistModel::from_pmf({{0, 0.55}, {1, 0.45}});
    CHECK(b.mean() == doctest::Approx(0.45).epsilon(1e-14));
    CHECK(b.variance() == doctest::Approx(0.45 * 0.55).epsilon(1e-14));
}

TEST_CASE("make_discrete_dist validation") {
    CHECK_THROWS_AS(DistModel::from_pmf({{0, 0.5}, {1, 0.4}}), htq::ValidationError);
    CHECK_THROWS_AS(DistModel::from_pmf({}), htq::ValidationError);
    CHECK_THROWS_AS(DistModel::from_pmf({{-1, 0.5}, {1, 0.5}}), htq::ValidationError);
    CHECK_THROWS_AS(DistModel::from_pmf({{0, 1.2}, {1, -0.2}}), htq::ValidationError);
}

TEST_CASE("moments") {
    CHECK(DistModel::point(0).moment(3) == 0.0);
    CHECK(DistModel::point(1).moment(5) == 1.0);
    auto u = DistModel::from_pmf({{0, 1.0 / 3}, {1, 1.0 / 3}, {2, 1.0 / 3}});
    CHECK(u.moment(2) == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(u.moment(0), htq::ValidationError);
}

TEST_CASE("moment identities vs stored mean/variance") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        std::map<std::int64_t, double> pmf;
        const int atoms = 1 + static_cast<int>(rng.next_below(6));
        double total = 0.0;
        for (int k = 0; k < atoms; ++k) {
            const double w = rng.next_unit() + 0.01;
            pmf[static_cast<std::int64_t>(rng.next_below(20))] += w;
            total += w;
        }
        for (auto& [v, p] : pmf) p /= total;
        auto d = DistModel::from_pmf(pmf);
        double m1 = 0.0, m2 = 0.0;
        for (const auto& [v, p] : d.support()) {
            m1 += p * v;
            m2 += p * v * v;
        }
        CHECK(std::abs(d.mean() - m1) <= 1e-12);
        CHECK(std::abs(d.variance() - (m2 - m1 * m1)) <= 1e-12);
        CHECK(d.moment(1) == doctest::Approx(d.mean()).epsilon(1e-13));
        CHECK(d.moment(2) - d.mean() * d.mean() ==
              doctest::Approx(d.variance()).epsilon(1e-12));
    }
}

TEST_CASE("sampling determinism and degenerate support") {
    auto d2 = DistModel::point(2);
    Rng r1(7);
    for (int i = 0; i < 100; ++i) CHECK(d2.sample(r1) == 2);

    auto d = DistModel::from_pmf({{0, 0.3}, {1, 0.2}, {5, 0.5}});
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) CHECK(d.sample(a) == d.sample(b));
}

TEST_CASE("sampling matches the distribution (CLT band)") {
    auto d = DistModel::bernoulli(0.5);
    Rng rng(2024);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(d.sample(rng));
    const double se = 0.5 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(sum / n - 0.5) <= 4.0 * se);
}

TEST_CASE("light tail certificate") {
    auto b = DistModel::bernoulli(0.45);
    auto cert = b.light_tail_certificate(1.0);
    CHECK(cert.bound == doctest::Approx(0.55 + 0.45 * std::exp(1.0)).epsilon(1e-12));

    CHECK(DistModel::point(0).light_tail_certificate(3.7).bound == doctest::Approx(1.0));

    auto c = b.light_tail_certificate(1e-9);
    CHECK(std::abs(c.bound - 1.0) <= 1e-6);

    CHECK_THROWS_AS(b.light_tail_certificate(0.0), htq::ValidationError);
    CHECK_THROWS_AS(b.light_tail_certificate(-1.0), htq::ValidationError);
}

TEST_CASE("light tail bound dominates e^{theta mean} (Jensen)") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        std::map<std::int64_t, double> pmf;
        double total = 0.0;
        for (int k = 0; k < 4; ++k) {
            const double w = rng.next_unit() + 0.05;
            pmf[static_cast<std::int64_t>(rng.next_below(8))] += w;
            total += w;
        }
        for (auto& [v, p] : pmf) p /= total;
        auto d = DistModel::from_pmf(pmf);
        const double theta = 0.1 + 2.0 * rng.next_unit();
        CHECK(d.light_tail_certificate(theta).bound >=
              std::exp(theta * d.mean()) * (1.0 - 1e-12));
    }
}

TEST_CASE("named families") {
    auto bin = DistModel::binomial(2, 0.9);
    CHECK(bin.mean() == doctest::Approx(0.9).epsilon(1e-13));
    CHECK(bin.variance() == doctest::Approx(2 * 0.45 * 0.55).epsilon(1e-12));
    CHECK(bin.max_support() == 2);

    auto u = DistModel::uniform_range(0, 2);
    CHECK(u.mean() == doctest::Approx(1.0));
    CHECK(u.moment(2) == doctest::Approx(5.0 / 3.0).epsilon(1e-13));

    CHECK_THROWS_AS(DistModel::bernoulli(1.5), htq::ValidationError);
    CHECK_THROWS_AS(DistModel::binomial(2, 2.5), htq::ValidationError);
}

TEST_CASE("truncated families keep mass and mean") {
    for (double mean : {0.4, 1.7, 6.0}) {
        auto p = DistModel::poisson(mean);
        double total = 0.0;
        for (const auto& [v, pr] : p.support()) total += pr;
        CHECK(std::abs(total - 1.0) <= 1e-12);
        CHECK(p.mean() == doctest::Approx(mean).epsilon(1e-7));

        auto g = DistModel::geometric(mean);
        total = 0.0;
        for (const auto& [v, pr] : g.support()) total += pr;
        CHECK(std::abs(total - 1.0) <= 1e-12);
        CHECK(g.mean() == doctest::Approx(mean).epsilon(1e-7));
    }
}
