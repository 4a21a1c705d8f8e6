#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ltr/dynamic_systems.hpp"

namespace ltr {

struct SensitivityWeightParams {
  double ms = 3.162;
  double eps = 0.01;
  double xi = 0.5;
  double wb = 2.0 * 3.14159265358979323846 * 10.0;
  double gain = 1.0;  ///< extra output scaling of the whole weight

  void validate() const;
};

/// Shaping weight for the first design (10 Hz bandwidth, DC gain 100).
SensitivityWeightParams design1_weight_params();
/// Shaping weight for the second design (15 Hz bandwidth, DC gain 250).
SensitivityWeightParams design2_weight_params();

/// gain * (s^2/Ms + 2 xi wb s/sqrt(Ms) + wb^2) / (s^2 + 2 xi wb sqrt(eps) s + wb^2 eps)
TransferFunction make_sensitivity_weight(const SensitivityWeightParams& p);

/// diag(w, ..., w) realized channel by channel.
StateSpace diagonal_weight(const TransferFunction& w, Eigen::Index channels);

/// Plant with output disturbance shaped by the weight:
///   x' = A x + B u + Gamma w,  y = C x + theta
/// where A = blkdiag(A_p, A_d), B = [B_p; 0], Gamma = [0; B_d], C = [C_p, C_d].
struct AugmentedPlant {
  StateSpace plant;             ///< nominal plant G
  StateSpace model;             ///< (A, B, C, 0)
  RealMatrix gamma;             ///< process-noise input map
  RealMatrix weight_feedthrough;  ///< D_d of the weight, carried on the z path only
  Eigen::Index n_plant = 0;
  Eigen::Index n_weight = 0;
};

AugmentedPlant augment_plant(const StateSpace& plant, const StateSpace& weight);

struct NoiseIntensities {
  RealMatrix w;          ///< process noise intensity
  RealMatrix v;          ///< measurement noise intensity
  RealMatrix theta_cov;  ///< direct measurement noise covariance

  void validate() const;
};

/// W = I, V = I, theta = 1e-2 I for the given dimensions.
NoiseIntensities default_noise(Eigen::Index process_inputs, Eigen::Index outputs,
                               double theta = 1e-2);

struct KalmanDesign {
  RealMatrix kf;
  RealMatrix covariance;
  SolverReport report;
  StateSpace filter_loop;  ///< C Phi Kf
};

KalmanDesign design_kalman(const AugmentedPlant& aug, const NoiseIntensities& noise,
                           const Tolerances& tol = default_tolerances());

struct LqrDesign {
  RealMatrix kc;
  RealMatrix riccati;
  SolverReport report;
  StateSpace loop;  ///< Kc Phi B
};

/// LQ regulator with Q = C'C on the regulated output and R = rho I.
LqrDesign design_lqr(const AugmentedPlant& aug, double rho,
                     const Tolerances& tol = default_tolerances());

/// Compensator K = (A - B Kc - Kf C, Kf, Kc, 0) in negative-feedback form, u = -K y.
StateSpace assemble_lqg(const AugmentedPlant& aug, const RealMatrix& kf, const RealMatrix& kc);

struct RhoDesign {
  double rho = 0.0;
  RealMatrix kc;
  StateSpace compensator;
  double recovery_error = 0.0;
  bool stable = false;
  double closed_loop_max_real = 0.0;
  double closed_loop_min_real = 0.0;
  std::string failure;  ///< non-empty when the design could not be computed
};

struct LqgLtrDesign {
  AugmentedPlant aug;
  KalmanDesign kalman;
  std::vector<RhoDesign> by_rho;

  [[nodiscard]] const RhoDesign& at(double rho) const;
};

struct SweepOptions {
  FrequencyGridSpec recovery_band{0.1, 100.0, 200};
  std::size_t workers = 1;
  Tolerances tolerances{};
};

/// max_band sigma_max(G K - C Phi Kf) / max(max_band sigma_max(C Phi Kf), 1e-12)
double recovery_error(const StateSpace& plant, const StateSpace& compensator,
                      const StateSpace& filter_loop, const std::vector<double>& omega);

LqgLtrDesign ltr_sweep(const AugmentedPlant& aug, const KalmanDesign& kalman,
                       const std::vector<double>& rhos, const SweepOptions& options = {});

/// augment_plant + design_kalman + ltr_sweep.
LqgLtrDesign design_lqg_ltr(const StateSpace& plant, const StateSpace& weight,
                            const NoiseIntensities& noise, const std::vector<double>& rhos,
                            const SweepOptions& options = {});

}  // namespace ltr
