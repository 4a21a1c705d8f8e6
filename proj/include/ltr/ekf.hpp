#pragma once

#include <cstdint>
#include <vector>

#include "ltr/gimbal_model.hpp"

namespace ltr {

/// Augmented state [x1..x4, J, Bv] and covariance of the continuous-discrete EKF.
struct EkfEstimate {
  RealVector x = RealVector::Zero(6);
  RealMatrix p = RealMatrix::Zero(6, 6);
  int inertia_clamps = 0;  ///< times x5 was clamped to the inertia floor
};

inline constexpr double kInertiaFloor = 1e-6;

/// Lag-model dynamics with inertia and friction appended as constant states.
/// Known constants (ka, kt, wg, xi, d) come from `model`; its j and bv are unused.
RealVector ekf_dynamics(const GimbalAxisParams& model, const RealVector& x, double u);
RealMatrix ekf_jacobian(const GimbalAxisParams& model, const RealVector& x);

/// RK4 propagation of state and covariance (P' = F P + P F' + Qc) over dt in `substeps` steps.
EkfEstimate ekf_predict(const GimbalAxisParams& model, const EkfEstimate& est, double u, double dt,
                        const RealMatrix& process_noise, int substeps = 10);

struct EkfInnovation {
  double innovation = 0.0;
  double variance = 0.0;
};

/// Measurement y = x1 + noise; Joseph-form covariance update.
EkfEstimate ekf_update(const EkfEstimate& est, double y, double meas_noise,
                       EkfInnovation* info = nullptr);

struct EkfRunOptions {
  double excitation_amplitude = 0.1;  ///< A
  double excitation_hz = 4.0;
  double duration = 20.0;             ///< s
  double meas_dt = 1e-3;              ///< s
  int substeps = 10;
  double meas_noise_std = 1e-3;       ///< rad/s, added to the synthetic data
  double filter_meas_variance = 0.0;  ///< 0 means meas_noise_std^2 (floored at 1e-12)
  double init_scale = 1.5;            ///< initial J, Bv guesses relative to truth
  double state_process_noise = 1e-6;
  double param_process_noise = 1e-8;
  std::uint64_t seed = 1;
};

struct EkfRun {
  std::vector<double> time;
  std::vector<double> inertia;
  std::vector<double> friction;
  std::vector<double> covariance_trace;
  EkfEstimate final;
  double min_covariance_eigenvalue = 0.0;  ///< over the periodic PSD checks
  double min_innovation_variance = 0.0;
  double max_asymmetry = 0.0;
};

/// Synthetic lag-model data from `truth`, then the CD-EKF from perturbed guesses.
/// Throws DivergedFilter when the covariance trace rises for more than a quarter of the run.
EkfRun estimate_parameters(const GimbalAxisParams& truth, const EkfRunOptions& options = {});

}  // namespace ltr
