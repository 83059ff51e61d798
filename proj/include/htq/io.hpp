#pragma once

#include <string>

#include <json.hpp>

#include "htq/estimation.hpp"
#include "htq/harness.hpp"
#include "htq/stein.hpp"

namespace htq {

// Shortest round-trip decimal representation; keeps emitted files
// byte-identical for identical inputs.
std::string format_double(double v);

// Header: epsilon,dw,dw_over_eps,mean_scaled,target_mean,mean_u,mean_u2,
//         cross_term,face_saturation,perp_m2
std::string sweep_csv(const SweepResult& result);

nlohmann::ordered_json sweep_fit_json(const SweepResult& result);

// Long format for plotting: epsilon,metric,value
std::string sweep_long_csv(const SweepResult& result);

// Per-run JSON: epsilon, horizon, burn_in, mean_scaled, dw, mean_u, mean_u2,
// cross_term, perp_moments, face_saturation, ci{...} plus diagnostics.
nlohmann::ordered_json run_json(const SteadyStateEstimate& est, double dw,
                                const DriftReport& drift);

std::string samples_csv(const SteadyStateEstimate& est);

// Columns: x,f1,f2,f3,residual
std::string stein_grid_csv(const SteinSolution& sol);

nlohmann::ordered_json stein_report_json(const SteinSolution& sol,
                                         const GradientBoundReport& bounds);

nlohmann::ordered_json ssc_json(const SscBoundConstants& consts);

// Creates the directory if needed and writes content (single writer).
void write_file(const std::string& dir, const std::string& name, const std::string& content);

}  // namespace htq
