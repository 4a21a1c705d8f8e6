#include "ltr/identification.hpp"

#include <cmath>
#include <numbers>

#include "ltr/gimbal_model.hpp"
#include "ltr/parallel.hpp"

namespace ltr {

IdentifiedResponse swept_sine_identify(const StateSpace& plant, const DiscreteStateSpace& controller,
                                       const std::vector<double>& grid_hz,
                                       const SweptSineOptions& options) {
  const int discard_min = options.cycles / 2;
  const int measured = options.cycles - discard_min;
  if (measured < 10) {
    throw Error(ErrorKind::InsufficientCycles,
                "swept sine needs at least 10 steady cycles, got " + std::to_string(measured));
  }
  for (std::size_t i = 0; i < grid_hz.size(); ++i) {
    if (!(grid_hz[i] > 0.0) || (i > 0 && !(grid_hz[i] > grid_hz[i - 1]))) {
      throw Error(ErrorKind::InvalidParameters, "identification grid must be positive ascending");
    }
  }
  const double radius = sampled_loop_spectral_radius(plant, controller);
  if (!(radius < 1.0)) {
    throw Error(ErrorKind::UnstableClosedLoop,
                "sampled-data loop spectral radius " + std::to_string(radius) + " >= 1");
  }
  const Eigen::Index p = plant.outputs();
  IdentifiedResponse out;
  out.freq_hz = grid_hz;
  out.s.assign(grid_hz.size(), ComplexMatrix::Zero(p, p));
  out.sigma.resize(grid_hz.size());

  const std::size_t jobs = grid_hz.size() * static_cast<std::size_t>(p);
  parallel_for(jobs, options.workers, [&](std::size_t job) {
    const std::size_t fi = job / static_cast<std::size_t>(p);
    const auto channel = static_cast<Eigen::Index>(job % static_cast<std::size_t>(p));
    const double f = grid_hz[fi];
    const int discard =
        std::max(discard_min, static_cast<int>(std::ceil(f * options.min_settle - 1e-9)));
    const CorrelationWindow window{2.0 * std::numbers::pi * f, discard / f,
                                   (discard + measured) / f};
    const DisturbanceProfile dist = sinusoid_profile(p, channel, options.amplitude, f);
    const ComplexVector y = simulate_phasor(plant, controller, dist, window, options.sim);
    // a sin(wt) has phasor -j a
    out.s[fi].col(channel) = y / Complex(0.0, -options.amplitude);
  });
  for (std::size_t i = 0; i < grid_hz.size(); ++i) out.sigma[i] = svd_values(out.s[i]);
  return out;
}

DelayComparison compare_delay_models(double d, double f_hz) {
  if (!(d > 0.0) || !(f_hz >= 0.0)) {
    throw Error(ErrorKind::InvalidParameters, "delay and frequency must be positive");
  }
  const double omega = 2.0 * std::numbers::pi * f_hz;
  const Complex pade = pade_factor(d).at_frequency(omega);
  const Complex lag = lag_factor(d).at_frequency(omega);
  const Complex ratio = pade / lag;
  return {std::abs(pade) / std::abs(lag), std::arg(ratio) * 180.0 / std::numbers::pi};
}

}  // namespace ltr
