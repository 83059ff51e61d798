#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "htq/rng.hpp"

namespace htq {

// Exponential-moment certificate: E[e^{theta X}] <= bound (here: computed exactly).
struct LightTailCert {
    double theta;
    double bound;
};

// Finite-support integer-valued distribution with exact moments.
// Immutable after construction; safe to share across concurrent workers.
class DistModel {
public:
    // pmf must have non-negative integer values, probabilities >= 0 summing
    // to 1 within 1e-12. Zero-probability atoms are dropped.
    static DistModel from_pmf(const std::map<std::int64_t, double>& pmf);

    static DistModel point(std::int64_t value);
    static DistModel bernoulli(double p);
    // Binomial(n, p) with p = mean / n.
    static DistModel binomial(int n, double mean);
    // Uniform on the integers {lo, ..., hi}.
    static DistModel uniform_range(std::int64_t lo, std::int64_t hi);
    // Unbounded families are truncated at the smallest K with tail mass
    // <= mass_loss, then renormalized; moments stay exact for the truncated pmf.
    static DistModel poisson(double mean, double mass_loss = 1e-10);
    static DistModel geometric(double mean, double mass_loss = 1e-10);

    double mean() const { return mean_; }
    double variance() const { return variance_; }
    std::int64_t max_support() const { return support_.back().first; }

    // Exact Sum pmf(x) * x^order.
    double moment(int order) const;

    // E[e^{theta X}], exact for the finite support. Requires theta > 0.
    LightTailCert light_tail_certificate(double theta) const;

    // Inverse-CDF sampling; the draw sequence is a pure function of the rng state.
    std::int64_t sample(Rng& rng) const {
        const double u = rng.next_unit();
        std::size_t lo = 0, hi = cum_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cum_[mid] <= u) lo = mid + 1; else hi = mid;
        }
        return support_[lo].first;
    }

    const std::vector<std::pair<std::int64_t, double>>& support() const { return support_; }
    double pmf_at(std::int64_t value) const;

private:
    DistModel() = default;
    void finalize();  // computes mean/variance/cum from support_

    std::vector<std::pair<std::int64_t, double>> support_;  // sorted by value
    std::vector<double> cum_;
    double mean_ = 0.0;
    double variance_ = 0.0;
};

}  // namespace htq
