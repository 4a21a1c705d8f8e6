#pragma once

#include <cstddef>
#include <vector>

#include "ltr/dynamic_systems.hpp"
#include "ltr/gimbal_model.hpp"

namespace ltr {

struct LoopMaps {
  StateSpace s_o;  ///< (I + G K)^-1
  StateSpace t_o;  ///< G K (I + G K)^-1
};

/// Output sensitivity maps of the negative-feedback loop u = -K y.
/// Throws UnstableClosedLoop listing the offending eigenvalues.
LoopMaps closed_loop_maps(const StateSpace& g, const StateSpace& k);

struct TestResult {
  double value = 0.0;
  double omega = 0.0;  ///< attaining frequency, rad/s
  bool pass = false;   ///< value < 1
};

TestResult nominal_performance(const StateSpace& we, const StateSpace& s_o,
                               const FrequencyGridSpec& band = {});
TestResult robust_stability(const StateSpace& w1, const StateSpace& t_o,
                            const FrequencyGridSpec& band = {});

struct RobustnessReport {
  std::vector<double> omega;
  std::vector<double> np_trace;
  std::vector<double> rs_trace;
  std::vector<double> rp_trace;
  TestResult np;
  TestResult rs;
  TestResult rp;
};

/// Pointwise sigma(We S) + sigma(W1 T) on the grid; the peak also covers DC,
/// the np/rs peak frequencies and a golden-section refinement.
TestResult robust_performance(const StateSpace& we, const StateSpace& s_o, const StateSpace& w1,
                              const StateSpace& t_o, const FrequencyGridSpec& band = {},
                              std::vector<double>* trace = nullptr);

RobustnessReport analyze_robustness(const StateSpace& g, const StateSpace& k, const StateSpace& we,
                                    const StateSpace& w1, const FrequencyGridSpec& band = {},
                                    std::size_t workers = 1);

/// Max real part of the closed-loop spectrum of (G, K).
double closed_loop_abscissa(const StateSpace& g, const StateSpace& k);

struct DestabilizationWitness {
  double rs_peak = 0.0;
  double omega = 0.0;
  PerturbationSpec spec;          ///< Delta with ||Delta||_inf = 1/rs_peak
  double unstable_scale = 0.0;    ///< first tried scale > 1 that destabilizes, 0 if none
  double abscissa_below = 0.0;    ///< closed-loop abscissa at scale 0.99
  double abscissa_above = 0.0;    ///< closed-loop abscissa at unstable_scale
};

/// Builds the rank-one all-pass Delta that makes det(I + Delta W1 T) vanish at the
/// robust-stability peak, then probes scales just above one.
DestabilizationWitness destabilization_witness(const StateSpace& g, const StateSpace& k,
                                               const StateSpace& w1,
                                               const FrequencyGridSpec& band = {});

}  // namespace ltr
