#pragma once

#include <cstddef>
#include <vector>

#include "ltr/simulation.hpp"

namespace ltr {

struct SweptSineOptions {
  double amplitude = 0.01;  ///< rad/s
  int cycles = 20;          ///< per frequency; the first half is discarded
  double min_settle = 2.0;  ///< seconds discarded at least, rounded up to whole cycles
  std::size_t workers = 1;
  SimulationOptions sim{};
};

struct IdentifiedResponse {
  std::vector<double> freq_hz;
  std::vector<ComplexMatrix> s;     ///< identified output sensitivity
  std::vector<RealVector> sigma;    ///< singular values of each estimate
};

/// Column-by-column sinusoidal identification of the output sensitivity of the
/// sampled-data loop by in-phase/quadrature correlation.
IdentifiedResponse swept_sine_identify(const StateSpace& plant, const DiscreteStateSpace& controller,
                                       const std::vector<double>& grid_hz,
                                       const SweptSineOptions& options = {});

struct DelayComparison {
  double magnitude_ratio = 1.0;       ///< |Pade| / |lag|
  double phase_difference_deg = 0.0;  ///< arg(Pade) - arg(lag)
};

/// Second-order Pade factor against the first-order lag 1/(d s + 1) at j 2 pi f.
DelayComparison compare_delay_models(double d, double f_hz);

}  // namespace ltr
