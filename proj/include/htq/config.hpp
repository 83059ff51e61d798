#pragma once

#include <optional>
#include <string>
#include <vector>

#include "htq/estimation.hpp"
#include "htq/harness.hpp"
#include "htq/system.hpp"

namespace htq {

struct OutputSpec {
    std::string dir = ".";
    bool csv = true;
    bool json = true;
};

struct SweepSpec {
    std::vector<double> eps_grid;
    std::optional<HorizonRule> horizon_rule;
};

struct ExperimentConfig {
    SystemTemplate system;
    std::optional<double> epsilon;  // for `simulate`
    EstimatorConfig estimator;
    SweepSpec sweep;
    OutputSpec output;
};

// Parses the JSON experiment file. Unknown keys anywhere are fatal
// (UsageError naming the offending dotted key); semantic problems raise
// ValidationError.
ExperimentConfig parse_experiment_config(const std::string& json_text);

ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace htq
