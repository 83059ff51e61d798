#include "htq/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "htq/errors.hpp"

namespace htq {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw UsageError("config: " + path + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key))
            throw UsageError("config: unknown key '" + (path.empty() ? key : path + "." + key) +
                             "'");
    }
}

template <class T>
T require(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) throw UsageError("config: missing key '" + path + "." + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError("config: bad value type for '" + path + "." + key + "'");
    }
}

template <class T>
std::optional<T> optional_get(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) return std::nullopt;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError("config: bad value type for '" + path + "." + key + "'");
    }
}

DistSpec parse_dist(const json& obj, const std::string& path) {
    check_keys(obj, path, {"family", "mean", "n", "lo", "hi", "value", "pmf", "mass_loss"});
    DistSpec spec;
    const auto family = require<std::string>(obj, path, "family");
    if (family == "bernoulli") spec.family = DistSpec::Family::Bernoulli;
    else if (family == "binomial") spec.family = DistSpec::Family::Binomial;
    else if (family == "uniform") spec.family = DistSpec::Family::Uniform;
    else if (family == "point") spec.family = DistSpec::Family::Point;
    else if (family == "poisson") spec.family = DistSpec::Family::Poisson;
    else if (family == "geometric") spec.family = DistSpec::Family::Geometric;
    else if (family == "pmf") spec.family = DistSpec::Family::Pmf;
    else throw UsageError("config: unknown distribution family '" + family + "' at " + path);

    spec.mean = optional_get<double>(obj, path, "mean");
    if (auto v = optional_get<int>(obj, path, "n")) spec.n = *v;
    if (auto v = optional_get<std::int64_t>(obj, path, "lo")) spec.lo = *v;
    if (auto v = optional_get<std::int64_t>(obj, path, "hi")) spec.hi = *v;
    if (auto v = optional_get<std::int64_t>(obj, path, "value")) spec.value = *v;
    if (auto v = optional_get<double>(obj, path, "mass_loss")) spec.mass_loss = *v;
    if (obj.contains("pmf")) {
        const auto& table = obj.at("pmf");
        if (!table.is_object()) throw UsageError("config: " + path + ".pmf must be an object");
        for (const auto& [key, value] : table.items()) {
            try {
                spec.pmf[std::stoll(key)] = value.get<double>();
            } catch (const std::exception&) {
                throw UsageError("config: bad pmf entry '" + key + "' at " + path);
            }
        }
    }
    return spec;
}

CapacityFace parse_face(const json& obj, const std::string& path) {
    check_keys(obj, path, {"c", "b", "anchor", "delta"});
    CapacityFace face;
    face.c = require<std::vector<double>>(obj, path, "c");
    face.b = require<double>(obj, path, "b");
    face.anchor = require<std::vector<double>>(obj, path, "anchor");
    if (auto v = optional_get<double>(obj, path, "delta")) face.delta = *v;
    return face;
}

SystemTemplate parse_system(const json& obj) {
    const std::string path = "system";
    check_keys(obj, path,
               {"kind", "n", "policy", "arrival", "arrivals", "service", "service_set", "face",
                "epsilon"});
    SystemTemplate sys;
    const auto kind = require<std::string>(obj, path, "kind");
    if (kind == "single_server") sys.kind = SystemKind::SingleServer;
    else if (kind == "load_balance") sys.kind = SystemKind::LoadBalance;
    else if (kind == "schedule") sys.kind = SystemKind::Schedule;
    else throw UsageError("config: unknown system.kind '" + kind + "'");

    sys.n = obj.contains("n") ? require<int>(obj, path, "n")
                              : (sys.kind == SystemKind::SingleServer ? 1 : 2);

    if (auto policy = optional_get<std::string>(obj, path, "policy")) {
        if (*policy == "jsq") sys.rule = DispatchRule::Jsq;
        else if (*policy == "random") sys.rule = DispatchRule::Random;
        else if (*policy == "maxweight") {
            if (sys.kind != SystemKind::Schedule)
                throw ValidationError("config: maxweight policy requires kind 'schedule'");
        } else {
            throw UsageError("config: unknown system.policy '" + *policy + "'");
        }
    }

    if (obj.contains("arrival")) sys.arrival = parse_dist(obj.at("arrival"), path + ".arrival");
    if (obj.contains("arrivals")) {
        const auto& arr = obj.at("arrivals");
        if (!arr.is_array()) throw UsageError("config: system.arrivals must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i)
            sys.arrivals.push_back(parse_dist(arr[i], path + ".arrivals[" + std::to_string(i) + "]"));
    }
    if (obj.contains("service")) {
        const auto& svc = obj.at("service");
        if (svc.is_array()) {
            for (std::size_t i = 0; i < svc.size(); ++i)
                sys.service.push_back(parse_dist(svc[i], path + ".service[" + std::to_string(i) + "]"));
        } else {
            // one model shared by all queues
            const DistSpec one = parse_dist(svc, path + ".service");
            sys.service.assign(static_cast<std::size_t>(sys.n), one);
        }
    }
    if (obj.contains("service_set")) {
        const auto schedules = require<std::vector<std::vector<std::int64_t>>>(obj, path, "service_set");
        sys.sset.schedules = schedules;
    }
    if (obj.contains("face")) sys.face = parse_face(obj.at("face"), path + ".face");
    return sys;
}

EstimatorConfig parse_estimator(const json& obj) {
    const std::string path = "estimator";
    check_keys(obj, path,
               {"horizon", "burn_in", "batch_count", "seed", "thinning", "sample_cap", "guard"});
    EstimatorConfig cfg;
    if (auto v = optional_get<std::uint64_t>(obj, path, "horizon")) cfg.horizon = *v;
    if (auto v = optional_get<std::uint64_t>(obj, path, "burn_in")) cfg.burn_in = *v;
    if (auto v = optional_get<std::uint32_t>(obj, path, "batch_count")) cfg.batch_count = *v;
    if (auto v = optional_get<std::uint64_t>(obj, path, "seed")) cfg.seed = *v;
    if (auto v = optional_get<std::uint64_t>(obj, path, "thinning")) cfg.thinning = *v;
    if (auto v = optional_get<std::uint64_t>(obj, path, "sample_cap")) cfg.sample_cap = *v;
    if (auto v = optional_get<std::int64_t>(obj, path, "guard")) cfg.guard = *v;
    return cfg;
}

SweepSpec parse_sweep(const json& obj) {
    const std::string path = "sweep";
    check_keys(obj, path, {"eps_grid", "horizon_coeff", "horizon_min"});
    SweepSpec spec;
    spec.eps_grid = require<std::vector<double>>(obj, path, "eps_grid");
    if (obj.contains("horizon_coeff")) {
        HorizonRule rule;
        rule.coeff = require<double>(obj, path, "horizon_coeff");
        if (auto v = optional_get<std::uint64_t>(obj, path, "horizon_min"))
            rule.min_horizon = *v;
        spec.horizon_rule = rule;
    } else if (obj.contains("horizon_min")) {
        throw UsageError("config: sweep.horizon_min requires sweep.horizon_coeff");
    }
    return spec;
}

OutputSpec parse_output(const json& obj) {
    const std::string path = "output";
    check_keys(obj, path, {"dir", "formats"});
    OutputSpec out;
    if (auto v = optional_get<std::string>(obj, path, "dir")) out.dir = *v;
    if (obj.contains("formats")) {
        out.csv = out.json = false;
        for (const auto& f : require<std::vector<std::string>>(obj, path, "formats")) {
            if (f == "csv") out.csv = true;
            else if (f == "json") out.json = true;
            else throw UsageError("config: unknown output format '" + f + "'");
        }
    }
    return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw UsageError(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(root, "", {"system", "estimator", "sweep", "output"});
    if (!root.contains("system")) throw UsageError("config: missing 'system' section");

    ExperimentConfig cfg;
    cfg.system = parse_system(root.at("system"));
    cfg.epsilon = optional_get<double>(root.at("system"), "system", "epsilon");
    if (root.contains("estimator")) cfg.estimator = parse_estimator(root.at("estimator"));
    if (root.contains("sweep")) cfg.sweep = parse_sweep(root.at("sweep"));
    if (root.contains("output")) cfg.output = parse_output(root.at("output"));
    cfg.system.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

}  // namespace htq
