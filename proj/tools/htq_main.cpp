#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "htq/config.hpp"
#include "htq/errors.hpp"
#include "htq/estimation.hpp"
#include "htq/harness.hpp"
#include "htq/io.hpp"
#include "htq/stein.hpp"
#include "htq/system.hpp"

namespace {

using htq::UsageError;
using htq::ValidationError;

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

struct CommonOpts {
    std::string config_path;
    std::optional<double> epsilon;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> horizon;
    std::optional<std::string> out_dir;
};

htq::ExperimentConfig load_with_overrides(const CommonOpts& opts) {
    auto cfg = htq::load_experiment_config(opts.config_path);
    if (opts.epsilon) cfg.epsilon = *opts.epsilon;
    if (opts.seed) cfg.estimator.seed = *opts.seed;
    if (opts.horizon) cfg.estimator.horizon = *opts.horizon;
    if (opts.out_dir) cfg.output.dir = *opts.out_dir;
    return cfg;
}

int cmd_simulate(const CommonOpts& opts) {
    const auto cfg = load_with_overrides(opts);
    if (!cfg.epsilon) throw ValidationError("simulate: no epsilon given (config or --epsilon)");
    const htq::SystemSpec spec = cfg.system.instantiate(*cfg.epsilon);
    const auto est = htq::run_steady_state(spec, cfg.estimator);
    const double dw = htq::wasserstein_to_exp(est.scaled_samples, est.target_rate);
    const auto drift = htq::drift_identities(est, est.epsilon);
    if (cfg.output.json) htq::write_file(cfg.output.dir, "run.json", dump(htq::run_json(est, dw, drift)));
    if (cfg.output.csv) htq::write_file(cfg.output.dir, "run_samples.csv", htq::samples_csv(est));
    std::cout << dump(htq::run_json(est, dw, drift));
    return 0;
}

int cmd_sweep(const CommonOpts& opts) {
    const auto cfg = load_with_overrides(opts);
    if (cfg.sweep.eps_grid.empty())
        throw ValidationError("sweep: config has no sweep.eps_grid");
    const auto result = htq::sweep(cfg.system, cfg.sweep.eps_grid, cfg.estimator,
                                   cfg.sweep.horizon_rule);
    if (cfg.output.csv) {
        htq::write_file(cfg.output.dir, "sweep.csv", htq::sweep_csv(result));
        htq::write_file(cfg.output.dir, "sweep_long.csv", htq::sweep_long_csv(result));
    }
    if (cfg.output.json)
        htq::write_file(cfg.output.dir, "sweep_fit.json", dump(htq::sweep_fit_json(result)));
    std::cout << htq::sweep_csv(result);
    std::cout << dump(htq::sweep_fit_json(result));
    return 0;
}

struct SteinOpts {
    double sigma2 = 1.0;
    double theta = 1.0;
    std::string h_name = "identity";
    std::vector<double> knots;
    std::vector<double> slopes;
    double sharp = 4.0;
    double center = 1.0;
    std::size_t points = 2048;
    double x_max = 0.0;
    std::string out_dir = ".";
};

int cmd_stein(const SteinOpts& opts) {
    htq::TestFunction tf = htq::TestFunction::identity();
    if (opts.h_name == "identity") {
        tf = htq::TestFunction::identity();
    } else if (opts.h_name == "pwl") {
        if (opts.slopes.size() != opts.knots.size() + 1)
            throw UsageError("stein: pwl needs --slopes with one more entry than --knots");
        tf = htq::TestFunction::piecewise_linear(opts.knots, opts.slopes);
    } else if (opts.h_name == "soft_clip") {
        tf = htq::TestFunction::soft_clip(opts.sharp, opts.center);
    } else {
        throw UsageError("stein: unknown test function '" + opts.h_name +
                         "' (identity|pwl|soft_clip)");
    }
    htq::GridSpec grid;
    grid.points = opts.points;
    grid.x_max = opts.x_max;
    const auto sol = htq::solve_stein(tf, {opts.sigma2, opts.theta}, grid);
    const auto bounds = htq::gradient_bounds_check(sol, sol.lip);
    htq::write_file(opts.out_dir, "stein_grid.csv", htq::stein_grid_csv(sol));
    htq::write_file(opts.out_dir, "stein_report.json", dump(htq::stein_report_json(sol, bounds)));
    std::cout << dump(htq::stein_report_json(sol, bounds));
    return 0;
}

struct SscOpts {
    int n = 2;
    std::int64_t amax = 1;
    std::int64_t smax = 1;
    double delta = 0.0;  // 0 = not given; falls back to the run's delta
    std::vector<int> orders{1};
    std::string est_path;
    std::string out_dir;
};

int cmd_ssc(const SscOpts& opts) {
    nlohmann::ordered_json out;
    out["constants"] = nlohmann::ordered_json::array();
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();

    double delta = opts.delta;
    bool delta_estimated = false;
    std::map<int, double> measured;
    if (!opts.est_path.empty()) {
        std::ifstream in(opts.est_path);
        if (!in) throw UsageError("ssc: cannot open '" + opts.est_path + "'");
        try {
            nlohmann::json run;
            in >> run;
            if (!run.contains("perp_moments"))
                throw ValidationError("ssc: run file has no perp_moments");
            for (const auto& [key, value] : run.at("perp_moments").items())
                measured[std::stoi(key)] = value.get<double>();
            if (delta <= 0.0 && run.contains("delta")) {
                delta = run.at("delta").get<double>();
                delta_estimated = run.value("delta_estimated", false);
            }
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("ssc: malformed run file: ") + e.what());
        }
    }
    if (delta <= 0.0)
        throw ValidationError("ssc: no positive delta (pass --delta or a run file carrying one)");
    out["delta"] = delta;
    out["delta_estimated"] = delta_estimated;
    for (int r : opts.orders) {
        const auto consts = htq::ssc_bound_constants(opts.n, opts.amax, opts.smax, delta, r);
        out["constants"].push_back(htq::ssc_json(consts));
        if (!opts.est_path.empty()) {
            auto it = measured.find(r);
            if (it == measured.end())
                throw ValidationError("ssc: moment order " + std::to_string(r) +
                                      " missing from run file");
            nlohmann::ordered_json c;
            c["r"] = r;
            c["estimate"] = it->second;
            c["M_r_bound"] = consts.M_r_bound;
            c["drift_lemma_bound"] = consts.drift_lemma_bound;
            c["pass"] = it->second <= consts.M_r_bound && it->second <= consts.drift_lemma_bound;
            checks.push_back(c);
        }
    }
    if (!opts.est_path.empty()) out["checks"] = checks;
    if (!opts.out_dir.empty()) htq::write_file(opts.out_dir, "ssc.json", dump(out));
    std::cout << dump(out);
    return 0;
}

int cmd_wasserstein(double rate, const std::string& samples_path) {
    std::ifstream in(samples_path);
    if (!in) throw UsageError("wasserstein: cannot open '" + samples_path + "'");
    std::vector<double> samples;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line == "scaled_sample") continue;
        try {
            samples.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw ValidationError("wasserstein: bad sample line '" + line + "'");
        }
    }
    const double dw = htq::wasserstein_to_exp(samples, rate);
    nlohmann::ordered_json j;
    j["rate"] = rate;
    j["n"] = samples.size();
    j["dw"] = dw;
    std::cout << dump(j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete-time queueing simulator with a Stein-method verification harness"};
    app.require_subcommand(1);
    // --h is a real option of the stein subcommand, so help is --help only
    app.set_help_flag("--help", "print help and exit");

    CommonOpts common;
    auto add_common = [&common](CLI::App* cmd, bool needs_config) {
        auto* c = cmd->add_option("--config", common.config_path, "experiment config (JSON)");
        if (needs_config) c->required();
        cmd->add_option("--epsilon", [&common](const CLI::results_t& v) {
            common.epsilon = std::stod(v[0]); return true; }, "override epsilon");
        cmd->add_option("--seed", [&common](const CLI::results_t& v) {
            common.seed = std::stoull(v[0]); return true; }, "override seed");
        cmd->add_option("--horizon", [&common](const CLI::results_t& v) {
            common.horizon = std::stoull(v[0]); return true; }, "override horizon");
        cmd->add_option("--out", [&common](const CLI::results_t& v) {
            common.out_dir = v[0]; return true; }, "output directory");
    };

    auto* simulate = app.add_subcommand("simulate", "run one system at a fixed epsilon");
    add_common(simulate, true);

    auto* sweep_cmd = app.add_subcommand("sweep", "run the epsilon grid and fit the rate");
    add_common(sweep_cmd, true);

    SteinOpts stein_opts;
    auto* stein_cmd = app.add_subcommand("stein", "solve the Stein equation and check bounds");
    stein_cmd->add_option("--sigma2", stein_opts.sigma2, "diffusion coefficient");
    stein_cmd->add_option("--theta", stein_opts.theta, "drift");
    stein_cmd->add_option("--h", stein_opts.h_name, "test function (identity|pwl|soft_clip)");
    stein_cmd->add_option("--knots", stein_opts.knots, "pwl knots")->delimiter(',');
    stein_cmd->add_option("--slopes", stein_opts.slopes, "pwl slopes")->delimiter(',');
    stein_cmd->add_option("--sharp", stein_opts.sharp, "soft_clip sharpness");
    stein_cmd->add_option("--center", stein_opts.center, "soft_clip center");
    stein_cmd->add_option("--points", stein_opts.points, "grid points");
    stein_cmd->add_option("--x-max", stein_opts.x_max, "grid upper end (0 = auto)");
    stein_cmd->add_option("--out", stein_opts.out_dir, "output directory");

    SscOpts ssc_opts;
    auto* ssc_cmd = app.add_subcommand("ssc", "state-space-collapse bound constants and checks");
    ssc_cmd->add_option("--n", ssc_opts.n, "number of queues");
    ssc_cmd->add_option("--amax", ssc_opts.amax, "max arrivals per queue per slot");
    ssc_cmd->add_option("--smax", ssc_opts.smax, "max service per queue per slot");
    ssc_cmd->add_option("--delta", ssc_opts.delta, "face drift constant");
    ssc_cmd->add_option("--r", ssc_opts.orders, "moment orders")->delimiter(',');
    ssc_cmd->add_option("--est", ssc_opts.est_path, "run.json with measured perp moments");
    ssc_cmd->add_option("--out", ssc_opts.out_dir, "output directory");

    double w_rate = 1.0;
    std::string w_samples;
    auto* w_cmd = app.add_subcommand("wasserstein", "d_W of a sample file to Exp(rate)");
    w_cmd->add_option("--rate", w_rate, "target exponential rate")->required();
    w_cmd->add_option("--samples", w_samples, "file with one sample per line")->required();

    try {
        app.parse(argc, argv);
        if (simulate->parsed()) return cmd_simulate(common);
        if (sweep_cmd->parsed()) return cmd_sweep(common);
        if (stein_cmd->parsed()) return cmd_stein(stein_opts);
        if (ssc_cmd->parsed()) return cmd_ssc(ssc_opts);
        if (w_cmd->parsed()) return cmd_wasserstein(w_rate, w_samples);
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const htq::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
