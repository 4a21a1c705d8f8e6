#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ltr/ekf.hpp"
#include "ltr/gimbal_model.hpp"
#include "ltr/lqgltr_design.hpp"
#include "ltr/simulation.hpp"

namespace cli {

inline constexpr int kSchemaVersion = 1;

/// Malformed or inconsistent configuration (exit 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input file from an earlier command is absent or stale (exit 4).
struct MissingDependency : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DisturbanceConfig {
  std::uint64_t seed = 7;
  double duration = 24.0;  ///< s
  double settle = 4.0;     ///< s
  int trace_stride = 10;   ///< samples between written trace rows
  ltr::DefaultProfileParams profile{};
};

struct SweepConfig {
  double f_lo_hz = 1.0;
  double f_hi_hz = 100.0;
  int points = 21;
  double amplitude = 0.01;
  int cycles = 20;
  int perturbation_count = 20;
  std::uint64_t perturbation_seed = 2024;
};

struct ProjectConfig {
  ltr::GimbalAxisParams azimuth = ltr::azimuth_params();
  ltr::GimbalAxisParams elevation = ltr::elevation_params();
  ltr::DelayModel delay = ltr::DelayModel::Pade;
  ltr::SensitivityWeightParams design_weight = ltr::design2_weight_params();
  ltr::SensitivityWeightParams performance_weight = ltr::design1_weight_params();
  std::string uncertainty = "measured";
  double theta = 1e-2;
  std::vector<double> rhos{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  double selected_rho = 1e-4;
  ltr::FrequencyGridSpec grid{};
  int reduced_order = 12;
  double sample_period = 5e-4;
  DisturbanceConfig disturbance{};
  SweepConfig sweep{};
  ltr::EkfRunOptions ekf{};
  std::size_t workers = 1;
  std::string output_dir = "out";

  /// Throws ConfigError on any out-of-range or inconsistent value.
  void validate() const;
};

/// Reads a JSON config; every key is optional and unknown keys are errors.
ProjectConfig load_config(const std::string& path);
ProjectConfig parse_config(const std::string& text);

/// Applies --seed: disturbance, perturbation and EKF seeds become n, n + 1, n + 2.
void apply_seed(ProjectConfig& config, std::uint64_t seed);
/// "1e-1,1e-3" style list.
std::vector<double> parse_rho_list(const std::string& text);
/// "lo:hi:points_per_decade" in Hz.
ltr::FrequencyGridSpec parse_grid(const std::string& text);

/// Canonical JSON of everything that affects results (not workers or output_dir).
std::string canonical_json(const ProjectConfig& config);
/// FNV-1a 64-bit of canonical_json, 16 hex digits.
std::string config_hash(const ProjectConfig& config);

}  // namespace cli
