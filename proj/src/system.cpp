#include "htq/system.hpp"

#include <algorithm>
#include <cmath>

#include "htq/errors.hpp"

namespace htq {

bool DistSpec::mean_parametrized() const {
    switch (family) {
        case Family::Bernoulli:
        case Family::Binomial:
        case Family::Poisson:
        case Family::Geometric:
            return true;
        default:
            return false;
    }
}

DistModel DistSpec::realize() const {
    switch (family) {
        case Family::Uniform: return DistModel::uniform_range(lo, hi);
        case Family::Point: return DistModel::point(value);
        case Family::Pmf: return DistModel::from_pmf(pmf);
        default:
            if (!mean) throw ValidationError("distribution family needs a mean");
            return realize_with_mean(*mean);
    }
}

DistModel DistSpec::realize_with_mean(double m) const {
    switch (family) {
        case Family::Bernoulli: return DistModel::bernoulli(m);
        case Family::Binomial: return DistModel::binomial(n, m);
        case Family::Poisson: return DistModel::poisson(m, mass_loss);
        case Family::Geometric: return DistModel::geometric(m, mass_loss);
        default:
            throw ValidationError("distribution family cannot be re-parametrized by mean");
    }
}

std::vector<double> SystemSpec::weights() const {
    if (kind == SystemKind::Schedule) return face->c;
    return std::vector<double>(static_cast<std::size_t>(n), 1.0);
}

double SystemSpec::mu_sigma() const {
    double mu = 0.0;
    for (const auto& s : service) mu += s.mean();
    return mu;
}

std::int64_t SystemSpec::s_max() const {
    std::int64_t m = 0;
    if (kind == SystemKind::Schedule) {
        for (const auto& s : sset.schedules)
            for (auto v : s) m = std::max(m, v);
    } else {
        for (const auto& s : service) m = std::max(m, s.max_support());
    }
    return m;
}

std::int64_t SystemSpec::a_max() const {
    std::int64_t m = 0;
    if (kind == SystemKind::Schedule) {
        for (const auto& a : arrivals) m = std::max(m, a.max_support());
    } else {
        m = arrival_total.max_support();
    }
    return m;
}

double SystemSpec::target_rate() const {
    switch (kind) {
        case SystemKind::SingleServer:
            return 2.0 / (arrival_total.variance() + service[0].variance());
        case SystemKind::LoadBalance: {
            double nu2 = 0.0;
            for (const auto& s : service) nu2 += s.variance();
            return 2.0 / (arrival_total.variance() + nu2);
        }
        case SystemKind::Schedule: {
            // The drift of <c,Q> under lambda^(eps) = anchor - eps*c is
            // eps*<c,c>, so the exponential limit of eps*<c,Q> has rate
            // 2<c,c>/<c^2,sigma^2>; the <c,c> factor is 1 for a unit normal.
            double denom = 0.0;
            for (std::size_t i = 0; i < arrivals.size(); ++i)
                denom += face->c[i] * face->c[i] * arrivals[i].variance();
            return 2.0 * face->c_dot_c() / denom;
        }
    }
    throw ValidationError("unknown system kind");
}

void SystemTemplate::validate() const {
    if (n < 1) throw ValidationError("system: n must be >= 1");
    switch (kind) {
        case SystemKind::SingleServer:
            if (n != 1) throw ValidationError("single_server requires n = 1");
            if (service.size() != 1) throw ValidationError("single_server needs one service model");
            break;
        case SystemKind::LoadBalance:
            if (n < 2) throw ValidationError("load_balance requires n >= 2");
            if (service.size() != static_cast<std::size_t>(n))
                throw ValidationError("load_balance needs one service model per queue");
            break;
        case SystemKind::Schedule: {
            if (sset.schedules.empty()) throw ValidationError("schedule requires a service_set");
            if (!face) throw ValidationError("schedule requires a face");
            if (arrivals.size() != static_cast<std::size_t>(n))
                throw ValidationError("schedule needs one arrival model per queue");
            for (const auto& s : sset.schedules)
                if (s.size() != static_cast<std::size_t>(n))
                    throw ValidationError("service_set schedule dimension mismatch");
            validate_face(sset, *face);
            break;
        }
    }
    if (face) {
        face->validate();
        if (face->c.size() != static_cast<std::size_t>(n))
            throw ValidationError("face dimension does not match n");
    }
}

SystemSpec SystemTemplate::instantiate(double epsilon) const {
    validate();
    if (epsilon < 0.0) throw ValidationError("epsilon must be >= 0");
    SystemSpec spec;
    spec.kind = kind;
    spec.n = n;
    spec.rule = rule;
    spec.epsilon = epsilon;
    spec.sset = sset;
    spec.face = face;

    if (kind == SystemKind::Schedule) {
        const auto rates = heavy_arrival_rates(*face, epsilon);
        for (std::size_t i = 0; i < rates.size(); ++i)
            spec.arrivals.push_back(arrivals[i].realize_with_mean(rates[i]));
    } else {
        for (const auto& s : service) spec.service.push_back(s.realize());
        const double lambda = spec.mu_sigma() - epsilon;
        if (lambda < 0.0)
            throw ValidationError("epsilon exceeds total service rate");
        spec.arrival_total = arrival.realize_with_mean(lambda);
    }
    return spec;
}

std::string to_string(SystemKind kind) {
    switch (kind) {
        case SystemKind::SingleServer: return "single_server";
        case SystemKind::LoadBalance: return "load_balance";
        case SystemKind::Schedule: return "schedule";
    }
    return "?";
}

}  // namespace htq
