#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "htq/control.hpp"
#include "htq/distributions.hpp"

namespace htq {

enum class SystemKind { SingleServer, LoadBalance, Schedule };

// Declarative distribution description from the config file. Families that
// take a mean ("bernoulli", "binomial", "poisson", "geometric") can be left
// mean-less in heavy-traffic templates and instantiated per epsilon.
struct DistSpec {
    enum class Family { Bernoulli, Binomial, Uniform, Point, Poisson, Geometric, Pmf };

    Family family = Family::Bernoulli;
    std::optional<double> mean;
    int n = 1;                               // binomial
    std::int64_t lo = 0, hi = 0;             // uniform
    std::int64_t value = 0;                  // point
    std::map<std::int64_t, double> pmf;      // explicit table
    double mass_loss = 1e-10;                // truncation budget for unbounded families

    bool mean_parametrized() const;
    DistModel realize() const;               // requires mean where the family needs one
    DistModel realize_with_mean(double m) const;
};

// A fully instantiated system at one epsilon: everything run_steady_state needs.
struct SystemSpec {
    SystemKind kind = SystemKind::SingleServer;
    int n = 1;
    double epsilon = 0.0;
    DispatchRule rule = DispatchRule::Jsq;       // LoadBalance
    DistModel arrival_total = DistModel::point(0);   // SingleServer / LoadBalance
    std::vector<DistModel> arrivals;             // Schedule, per queue
    std::vector<DistModel> service;              // SingleServer / LoadBalance, per queue
    ServiceSet sset;                             // Schedule
    std::optional<CapacityFace> face;            // Schedule (required), others (optional)

    // Weight vector of the scaled statistic: (1,...,1) except for Schedule,
    // where it is the face normal.
    std::vector<double> weights() const;
    double mu_sigma() const;                     // total mean service rate
    std::int64_t s_max() const;                  // max total offered service per queue
    std::int64_t a_max() const;                  // max per-queue arrivals in one slot

    // Exponential rate of the heavy-traffic limit law for this system:
    //   SingleServer: 2 / (sigma_a^2 + sigma_s^2)
    //   LoadBalance:  2 / (sigma_Sigma^2 + nu_Sigma^2)
    //   Schedule:     2 / <c^2, sigma^2>
    double target_rate() const;
};

// The config-level description: an epsilon-parametrized family of systems.
struct SystemTemplate {
    SystemKind kind = SystemKind::SingleServer;
    int n = 1;
    DispatchRule rule = DispatchRule::Jsq;
    DistSpec arrival;                         // total arrivals (SingleServer / LoadBalance)
    std::vector<DistSpec> arrivals;           // per-queue (Schedule)
    std::vector<DistSpec> service;            // per queue
    ServiceSet sset;
    std::optional<CapacityFace> face;

    // Checks referential validity (policy vs. declared parts) and face geometry.
    void validate() const;
    // lambda_Sigma^(eps) = mu_Sigma - eps, or lambda^(eps) = anchor - eps*c.
    SystemSpec instantiate(double epsilon) const;
};

std::string to_string(SystemKind kind);

}  // namespace htq
