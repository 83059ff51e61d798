#include "htq/io.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "htq/errors.hpp"

namespace htq {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string sweep_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "epsilon,dw,dw_over_eps,mean_scaled,target_mean,mean_u,mean_u2,cross_term,"
           "face_saturation,perp_m2\n";
    for (const auto& r : result.rows) {
        out << format_double(r.epsilon) << ',' << format_double(r.dw) << ','
            << format_double(r.dw_over_eps) << ',' << format_double(r.mean_scaled) << ','
            << format_double(r.target_mean) << ',' << format_double(r.mean_u) << ','
            << format_double(r.mean_u2) << ',' << format_double(r.cross_term) << ','
            << format_double(r.face_saturation) << ',' << format_double(r.perp_m2) << '\n';
    }
    return out.str();
}

nlohmann::ordered_json sweep_fit_json(const SweepResult& result) {
    nlohmann::ordered_json j;
    j["rows"] = result.rows.size();
    j["fits"] = nlohmann::ordered_json::array();
    for (const auto& fit : {result.fit_linear, result.fit_eps_log}) {
        nlohmann::ordered_json f;
        f["model"] = to_string(fit.model);
        f["K"] = fit.K;
        f["r2"] = fit.r2;
        j["fits"].push_back(f);
    }
    return j;
}

std::string sweep_long_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "epsilon,metric,value\n";
    for (const auto& r : result.rows) {
        const std::pair<const char*, double> metrics[] = {
            {"dw", r.dw},           {"dw_over_eps", r.dw_over_eps},
            {"mean_scaled", r.mean_scaled}, {"target_mean", r.target_mean},
            {"mean_u", r.mean_u},   {"mean_u2", r.mean_u2},
            {"cross_term", r.cross_term},   {"face_saturation", r.face_saturation},
            {"perp_m2", r.perp_m2}};
        for (const auto& [name, value] : metrics)
            out << format_double(r.epsilon) << ',' << name << ',' << format_double(value) << '\n';
    }
    return out.str();
}

nlohmann::ordered_json run_json(const SteadyStateEstimate& est, double dw,
                                const DriftReport& drift) {
    nlohmann::ordered_json j;
    j["epsilon"] = est.epsilon;
    j["horizon"] = est.horizon;
    j["burn_in"] = est.burn_in;
    j["mean_scaled"] = est.mean_scaled.mean;
    j["dw"] = dw;
    j["mean_u"] = est.mean_u.mean;
    j["mean_u2"] = est.mean_u2.mean;
    j["cross_term"] = est.cross_term.mean;
    j["perp_moments"] = nlohmann::ordered_json::object();
    for (const auto& [r, stat] : est.perp_moments)
        j["perp_moments"][std::to_string(r)] = stat.mean;
    j["face_saturation"] = est.face_saturation;
    if (est.has_face) {
        j["delta"] = est.delta;
        j["delta_estimated"] = est.delta_estimated;
        if (est.delta_estimated) j["delta_samples"] = est.delta_samples;
    }
    j["ci"] = nlohmann::ordered_json{{"mean_scaled", est.mean_scaled.half},
                                     {"mean_u", est.mean_u.half},
                                     {"mean_u2", est.mean_u2.half},
                                     {"cross_term", est.cross_term.half},
                                     {"perp_m1", est.perp_moments.at(1).half},
                                     {"perp_m2", est.perp_moments.at(2).half}};
    j["seed"] = est.seed;
    j["slots_used"] = est.slots_used;
    j["mean_unscaled"] = est.mean_unscaled;
    j["target_rate"] = est.target_rate;
    j["target_mean"] = 1.0 / est.target_rate;
    j["drift"] = nlohmann::ordered_json{
        {"violations", drift.violations},
        {"mean_u_contains_eps", drift.mean_u_contains_eps},
        {"drift_gap", drift.drift_gap},
        {"combined_mean", drift.combined.mean},
        {"combined_ci_half_width", drift.combined.half},
        {"combined_contains_gap", drift.combined_contains_gap},
        {"u_upper_ok", drift.u_upper_ok},
        {"scheduled", drift.scheduled}};
    return j;
}

std::string samples_csv(const SteadyStateEstimate& est) {
    std::ostringstream out;
    out << "scaled_sample\n";
    for (double v : est.scaled_samples) out << format_double(v) << '\n';
    return out.str();
}

std::string stein_grid_csv(const SteinSolution& sol) {
    std::ostringstream out;
    out << "x,f1,f2,f3,residual\n";
    for (std::size_t i = 0; i < sol.grid.size(); ++i) {
        out << format_double(sol.grid[i]) << ',' << format_double(sol.f1[i]) << ','
            << format_double(sol.f2[i]) << ',' << format_double(sol.f3[i]) << ','
            << format_double(sol.residual[i]) << '\n';
    }
    return out.str();
}

nlohmann::ordered_json stein_report_json(const SteinSolution& sol,
                                         const GradientBoundReport& bounds) {
    nlohmann::ordered_json j;
    j["sigma2"] = sol.params.sigma2;
    j["theta"] = sol.params.theta;
    j["rate"] = stein_rate(sol.params);
    j["mean_z"] = 1.0 / stein_rate(sol.params);
    j["ehz"] = sol.ehz;
    j["lip"] = sol.lip;
    j["f1_at_0"] = sol.boundary_f1;
    j["grid_points"] = sol.grid.size();
    j["x_max"] = sol.grid.back();
    j["slack_f1"] = bounds.slack_f1();
    j["slack_f2"] = bounds.slack_f2();
    j["slack_f3"] = bounds.slack_f3();
    double rmax = 0.0;
    for (double r : sol.residual) rmax = std::max(rmax, std::abs(r));
    j["residual_max"] = rmax;
    return j;
}

nlohmann::ordered_json ssc_json(const SscBoundConstants& c) {
    nlohmann::ordered_json j;
    j["n"] = c.n;
    j["a_max"] = c.a_max;
    j["s_max"] = c.s_max;
    j["delta"] = c.delta;
    j["r"] = c.r;
    j["L"] = c.L;
    j["D"] = c.D;
    j["kappa"] = c.kappa;
    j["eta"] = c.eta;
    j["V_r"] = c.V_r;
    j["M_r_bound"] = c.M_r_bound;
    j["drift_lemma_bound"] = c.drift_lemma_bound;
    return j;
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << content;
}

}  // namespace htq
