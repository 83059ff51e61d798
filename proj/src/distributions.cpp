#include "htq/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "htq/errors.hpp"

namespace htq {

namespace {

constexpr double kPmfSumTol = 1e-12;

[[noreturn]] void fail(const std::string& msg) { throw ValidationError("DistModel: " + msg); }

}  // namespace

void DistModel::finalize() {
    double total = 0.0;
    for (const auto& [v, p] : support_) total += p;
    // Renormalize away the residual (<= kPmfSumTol by the caller's check, or
    // a truncation loss <= mass_loss for the unbounded families).
    for (auto& [v, p] : support_) p /= total;

    double m1 = 0.0, m2 = 0.0;
    for (const auto& [v, p] : support_) {
        m1 += p * static_cast<double>(v);
        m2 += p * static_cast<double>(v) * static_cast<double>(v);
    }
    mean_ = m1;
    variance_ = m2 - m1 * m1;

    cum_.resize(support_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) {
        acc += support_[i].second;
        cum_[i] = acc;
    }
    cum_.back() = 1.0;  // guard against rounding in the last bin
}

DistModel DistModel::from_pmf(const std::map<std::int64_t, double>& pmf) {
    if (pmf.empty()) fail("empty pmf");
    double total = 0.0;
    DistModel d;
    for (const auto& [v, p] : pmf) {
        if (v < 0) fail("negative support value " + std::to_string(v));
        if (p < 0.0) fail("negative probability at value " + std::to_string(v));
        total += p;
        if (p > 0.0) d.support_.emplace_back(v, p);
    }
    if (std::abs(total - 1.0) > kPmfSumTol)
        fail("probabilities sum to " + std::to_string(total) + ", not 1");
    if (d.support_.empty()) fail("pmf has no positive mass");
    d.finalize();
    return d;
}

DistModel DistModel::point(std::int64_t value) {
    return from_pmf({{value, 1.0}});
}

DistModel DistModel::bernoulli(double p) {
    if (p < 0.0 || p > 1.0) fail("bernoulli p out of [0,1]");
    std::map<std::int64_t, double> pmf;
    if (p < 1.0) pmf[0] = 1.0 - p;
    if (p > 0.0) pmf[1] = p;
    return from_pmf(pmf);
}

DistModel DistModel::binomial(int n, double mean) {
    if (n < 1) fail("binomial needs n >= 1");
    if (mean < 0.0 || mean > static_cast<double>(n)) fail("binomial mean out of [0,n]");
    const double p = mean / n;
    std::map<std::int64_t, double> pmf;
    double coeff = std::pow(1.0 - p, n);  // P(X=0)
    if (p == 1.0) coeff = 0.0;
    double prob = coeff;
    for (int k = 0; k <= n; ++k) {
        if (k > 0) {
            // iterative C(n,k) p^k (1-p)^(n-k)
            prob = prob * (static_cast<double>(n - k + 1) / k) * (p / (1.0 - p));
        }
        if (p == 1.0) prob = (k == n) ? 1.0 : 0.0;
        if (p == 0.0) prob = (k == 0) ? 1.0 : 0.0;
        if (prob > 0.0) pmf[k] = prob;
    }
    return from_pmf(pmf);
}

DistModel DistModel::uniform_range(std::int64_t lo, std::int64_t hi) {
    if (lo < 0 || hi < lo) fail("uniform range must satisfy 0 <= lo <= hi");
    std::map<std::int64_t, double> pmf;
    const double p = 1.0 / static_cast<double>(hi - lo + 1);
    for (std::int64_t v = lo; v <= hi; ++v) pmf[v] = p;
    return from_pmf(pmf);
}

DistModel DistModel::poisson(double mean, double mass_loss) {
    if (mean < 0.0) fail("poisson mean must be >= 0");
    if (mean == 0.0) return point(0);
    DistModel d;
    double p = std::exp(-mean);
    double cum = p;
    std::int64_t k = 0;
    d.support_.emplace_back(0, p);
    while (1.0 - cum > mass_loss) {
        ++k;
        p *= mean / static_cast<double>(k);
        cum += p;
        d.support_.emplace_back(k, p);
        if (k > 100000) fail("poisson truncation did not converge");
    }
    d.finalize();
    return d;
}

DistModel DistModel::geometric(double mean, double mass_loss) {
    if (mean < 0.0) fail("geometric mean must be >= 0");
    if (mean == 0.0) return point(0);
    // P(X=k) = (1-q) q^k on {0,1,...} with mean q/(1-q).
    const double q = mean / (1.0 + mean);
    DistModel d;
    double p = 1.0 - q;
    double cum = p;
    std::int64_t k = 0;
    d.support_.emplace_back(0, p);
    while (1.0 - cum > mass_loss) {
        ++k;
        p *= q;
        cum += p;
        d.support_.emplace_back(k, p);
        if (k > 1000000) fail("geometric truncation did not converge");
    }
    d.finalize();
    return d;
}

double DistModel::moment(int order) const {
    if (order < 1) throw ValidationError("moments: order must be >= 1");
    double acc = 0.0;
    for (const auto& [v, p] : support_) acc += p * std::pow(static_cast<double>(v), order);
    return acc;
}

LightTailCert DistModel::light_tail_certificate(double theta) const {
    if (theta <= 0.0) throw ValidationError("light_tail_certificate: theta must be > 0");
    double acc = 0.0;
    for (const auto& [v, p] : support_) acc += p * std::exp(theta * static_cast<double>(v));
    return LightTailCert{theta, acc};
}

double DistModel::pmf_at(std::int64_t value) const {
    auto it = std::lower_bound(support_.begin(), support_.end(), value,
                               [](const auto& a, std::int64_t v) { return a.first < v; });
    if (it == support_.end() || it->first != value) return 0.0;
    return it->second;
}

}  // namespace htq
