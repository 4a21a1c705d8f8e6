#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ltr/dynamic_systems.hpp"

namespace ltr {

/// a * sin(2 pi f t + phase)
struct Tone {
  double freq_hz = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
};

enum class DisturbanceKind { Sinusoid, Multisine, BandLimitedNoise };

std::string_view to_string(DisturbanceKind kind);

/// Output disturbance, rad/s, as a sum of tones per channel.
struct DisturbanceProfile {
  DisturbanceKind kind = DisturbanceKind::Multisine;
  std::uint64_t seed = 0;
  std::vector<std::vector<Tone>> channels;

  [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(channels.size()); }
  [[nodiscard]] RealVector value(double t) const;
  void value(double t, RealVector& out) const;
};

DisturbanceProfile sinusoid_profile(Eigen::Index channels, Eigen::Index axis, double amplitude,
                                    double freq_hz, double phase = 0.0);

struct DefaultProfileParams {
  std::vector<double> tone_freqs_hz{0.5, 1.0, 2.0, 5.0, 10.0};
  double reference_amplitude = 0.02;  ///< amplitude at the first tone; others scale as 1/f
  double noise_band_lo_hz = 0.25;
  double noise_band_hi_hz = 20.0;
  double noise_spacing_hz = 0.25;
  double noise_power_fraction = 0.1;
};

/// Multisine with 1/f amplitudes plus flat-spectrum random-phase noise tones.
DisturbanceProfile default_disturbance_profile(Eigen::Index channels, std::uint64_t seed,
                                               const DefaultProfileParams& params = {});

struct SimulationTrace {
  std::vector<double> time;
  RealMatrix rate;         ///< samples x outputs, measured rate w = y
  RealMatrix control;      ///< samples x inputs
  RealMatrix disturbance;  ///< samples x outputs
  RealMatrix angle;        ///< samples x outputs, integral of the rate error, rad
};

struct SimulationOptions {
  int substeps = 10;  ///< RK4 steps per controller period
  double blowup_threshold = 1e12;
};

/// Continuous plant (RK4 at Ts/substeps) in loop with a discrete controller under
/// zero-order hold, u = -K y, with the disturbance added at the plant output.
SimulationTrace simulate_closed_loop(const StateSpace& plant, const DiscreteStateSpace& controller,
                                     const DisturbanceProfile& dist, double duration,
                                     const SimulationOptions& options = {});

/// Correlation of each output with exp(-j omega t) over [t0, t1], integrated inside RK4.
struct CorrelationWindow {
  double omega = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
};

/// Runs the loop to window.t1 without recording and returns the output phasors
/// (2 / (t1 - t0)) * integral y exp(-j omega t) dt.
ComplexVector simulate_phasor(const StateSpace& plant, const DiscreteStateSpace& controller,
                              const DisturbanceProfile& dist, const CorrelationWindow& window,
                              const SimulationOptions& options = {});

/// RMS of the angle after `settle` seconds with the mean removed, microradians per axis.
RealVector rms_los_error(const SimulationTrace& trace, double settle);

/// Exact zero-order-hold equivalent of a continuous system.
DiscreteStateSpace zoh_discretize(const StateSpace& sys, double ts);

/// Fundamental-frequency output sensitivity of the sampled-data loop
/// S = I - G(jw) h(w) Kd (I + Gd Kd)^-1 with h the hold response.
ComplexMatrix sampled_sensitivity(const StateSpace& plant, const DiscreteStateSpace& controller,
                                  double omega);

/// Spectral radius of the sampled-data closed loop; < 1 means stable.
double sampled_loop_spectral_radius(const StateSpace& plant, const DiscreteStateSpace& controller);

/// Steady-state angle RMS (microradians per axis) for a tone profile through a
/// sensitivity function, summing per-frequency phasors.
RealVector rms_oracle(const std::function<ComplexMatrix(double)>& sensitivity,
                      const DisturbanceProfile& dist);

}  // namespace ltr
