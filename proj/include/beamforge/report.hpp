#pragma once

// Run reports: every pipeline stage fills the applicable subset of fields
// and serializes losslessly to JSON.  Wall time is recorded only at debug
// verbosity so that default outputs stay byte-identical across reruns.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "beamforge/common.hpp"

namespace beamforge {

struct DesignReport {
  std::string stage;
  int M = 0;
  std::optional<std::string> mode;
  std::optional<double> delta;
  std::optional<double> stopband_peak_db;
  std::optional<VectorXd> extremal_angles;
  std::optional<double> min_eigenvalue;
  std::optional<double> coeff_residual_max;
  std::optional<double> constraint_residual_max;
  std::optional<double> diag_residual;
  std::optional<double> factorization_error;
  std::optional<double> power_spread;
  std::optional<int> iterations;
  std::optional<int> inner_iterations;
  std::optional<bool> converged;
  std::optional<std::uint64_t> seed;
  std::optional<double> objective_initial;
  std::optional<double> objective_final;
  std::optional<double> offdiag_peak_ratio;
  std::optional<VectorXd> beta_sq_ratios;
  std::optional<double> target_scale;
  std::optional<double> uniform_pattern_deviation;
  std::optional<double> wall_time_ms;
};

inline nlohmann::json to_json(const DesignReport& r) {
  nlohmann::json j;
  j["stage"] = r.stage;
  j["elements"] = r.M;
  const auto put = [&j](const char* key, const auto& opt) {
    if (opt.has_value()) j[key] = *opt;
  };
  put("mode", r.mode);
  put("delta", r.delta);
  put("stopband_peak_db", r.stopband_peak_db);
  if (r.extremal_angles) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < r.extremal_angles->size(); ++i)
      arr.push_back((*r.extremal_angles)[i]);
    j["extremal_angles"] = arr;
  }
  put("min_eigenvalue", r.min_eigenvalue);
  put("coeff_residual_max", r.coeff_residual_max);
  put("constraint_residual_max", r.constraint_residual_max);
  put("diag_residual", r.diag_residual);
  put("factorization_error", r.factorization_error);
  put("power_spread", r.power_spread);
  put("iterations", r.iterations);
  put("inner_iterations", r.inner_iterations);
  put("converged", r.converged);
  put("seed", r.seed);
  put("objective_initial", r.objective_initial);
  put("objective_final", r.objective_final);
  put("offdiag_peak_ratio", r.offdiag_peak_ratio);
  if (r.beta_sq_ratios) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < r.beta_sq_ratios->size(); ++i)
      arr.push_back((*r.beta_sq_ratios)[i]);
    j["beta_sq_ratios"] = arr;
  }
  put("target_scale", r.target_scale);
  put("uniform_pattern_deviation", r.uniform_pattern_deviation);
  put("wall_time_ms", r.wall_time_ms);
  return j;
}

}  // namespace beamforge
