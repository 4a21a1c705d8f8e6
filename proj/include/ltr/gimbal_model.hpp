#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ltr/dynamic_systems.hpp"

namespace ltr {

/// Physical constants of one gimbal axis.
struct GimbalAxisParams {
  double ka = 2.0;      ///< amplifier gain, A/A
  double kt = 2.18;     ///< motor torque constant, N m/A
  double wg = 1646.0;   ///< gyro natural frequency, rad/s
  double xi = 0.8;      ///< gyro damping
  double d = 0.0045;    ///< gyro delay, s
  double j = 0.1736;    ///< inertia, kg m^2
  double bv = 1.15;     ///< viscous friction, N m/(rad/s)

  void validate() const;
};

GimbalAxisParams azimuth_params();
GimbalAxisParams elevation_params();

/// How the gyro delay enters the axis model.
enum class DelayModel {
  Pade,  ///< second-order all-pass Pade factor
  Lag,   ///< first-order lag 1/(d s + 1)
  None,  ///< delay dropped (minimum-phase variant)
};

TransferFunction motor_factor(const GimbalAxisParams& p);
TransferFunction gyro_factor(const GimbalAxisParams& p);
TransferFunction pade_factor(double d);
TransferFunction lag_factor(double d);
TransferFunction axis_transfer_function(const GimbalAxisParams& p, DelayModel delay = DelayModel::Pade);

/// Rate response to current reference; realized as a cascade of the factors.
StateSpace build_axis_model(const GimbalAxisParams& p, DelayModel delay = DelayModel::Pade);
StateSpace build_mimo_model(const GimbalAxisParams& az, const GimbalAxisParams& el,
                            DelayModel delay = DelayModel::Pade);

struct UncertaintyWeight {
  std::string axis;
  TransferFunction weight;
};

struct UncertaintyWeights {
  UncertaintyWeight azimuth;
  UncertaintyWeight elevation;
  StateSpace w1;  ///< diag(w1a, w1e)
};

UncertaintyWeights uncertainty_weights();

/// Delta(s) = E(s) M with E_ij(s) = g_ij (a_ij - s)/(a_ij + s).
/// ||Delta||_inf <= ||g||_F * sigma_max(M).
struct PerturbationSpec {
  RealMatrix gain;         ///< g, p x p
  RealMatrix pole;         ///< a > 0, p x p
  RealMatrix contraction;  ///< M, p x p
};

StateSpace realize_perturbation(const PerturbationSpec& spec);
/// Closed-form upper bound ||g||_F * sigma_max(M).
double perturbation_bound(const PerturbationSpec& spec);

/// G_p = (I + Delta W1) G.
StateSpace perturbed_plant(const StateSpace& nominal, const StateSpace& w1, const StateSpace& delta);

struct PerturbedModelSet {
  std::uint64_t seed = 0;
  std::vector<PerturbationSpec> specs;
  std::vector<StateSpace> deltas;
  std::vector<StateSpace> members;
  std::vector<bool> stable;
};

PerturbedModelSet sample_perturbed_models(const StateSpace& nominal, const StateSpace& w1,
                                          int count, std::uint64_t seed);

}  // namespace ltr
