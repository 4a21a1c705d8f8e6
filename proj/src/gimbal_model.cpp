#include "ltr/gimbal_model.hpp"

#include <cmath>
#include <numbers>

#include "ltr/random.hpp"

namespace ltr {

void GimbalAxisParams::validate() const {
  const bool positive = ka > 0 && kt > 0 && wg > 0 && d > 0 && j > 0 && bv > 0;
  if (!positive || !(xi > 0.0 && xi <= 1.0)) {
    throw Error(ErrorKind::InvalidParameters,
                "gimbal parameters must be positive with damping in (0, 1]");
  }
}

GimbalAxisParams azimuth_params() { return {}; }

GimbalAxisParams elevation_params() {
  GimbalAxisParams p;
  p.j = 0.063;
  p.bv = 0.61;
  return p;
}

TransferFunction motor_factor(const GimbalAxisParams& p) { return {{p.ka * p.kt}, {p.j, p.bv}}; }

TransferFunction gyro_factor(const GimbalAxisParams& p) {
  return {{p.wg * p.wg}, {1.0, 2.0 * p.xi * p.wg, p.wg * p.wg}};
}

TransferFunction pade_factor(double d) {
  return {{d * d / 12.0, -d / 2.0, 1.0}, {d * d / 12.0, d / 2.0, 1.0}};
}

TransferFunction lag_factor(double d) { return {{1.0}, {d, 1.0}}; }

TransferFunction axis_transfer_function(const GimbalAxisParams& p, DelayModel delay) {
  p.validate();
  TransferFunction tf = motor_factor(p) * gyro_factor(p);
  if (delay == DelayModel::Pade) tf = tf * pade_factor(p.d);
  if (delay == DelayModel::Lag) tf = tf * lag_factor(p.d);
  return tf;
}

StateSpace build_axis_model(const GimbalAxisParams& p, DelayModel delay) {
  p.validate();
  StateSpace sys = connect_series(tf_to_ss(motor_factor(p)), tf_to_ss(gyro_factor(p)));
  if (delay == DelayModel::Pade) sys = connect_series(sys, tf_to_ss(pade_factor(p.d)));
  if (delay == DelayModel::Lag) sys = connect_series(sys, tf_to_ss(lag_factor(p.d)));
  return balance_states(sys);
}

StateSpace build_mimo_model(const GimbalAxisParams& az, const GimbalAxisParams& el,
                            DelayModel delay) {
  return connect_diagonal(build_axis_model(az, delay), build_axis_model(el, delay));
}

UncertaintyWeights uncertainty_weights() {
  UncertaintyWeights w;
  w.azimuth = {"azimuth", {{1.87, 792.65, 90750.0}, {1.0, 650.35, 572624.0}}};
  w.elevation = {"elevation", {{1.12, 2564.28, 289957.0}, {1.0, 2059.65, 2375266.0}}};
  w.w1 = connect_diagonal(balance_states(tf_to_ss(w.azimuth.weight)),
                          balance_states(tf_to_ss(w.elevation.weight)));
  return w;
}

StateSpace realize_perturbation(const PerturbationSpec& spec) {
  const Eigen::Index p = spec.gain.rows();
  if (spec.gain.cols() != p || spec.pole.rows() != p || spec.pole.cols() != p ||
      spec.contraction.rows() != p || spec.contraction.cols() != p) {
    throw Error(ErrorKind::DimensionMismatch, "perturbation matrices must be square and equal size");
  }
  if ((spec.pole.array() <= 0.0).any()) {
    throw Error(ErrorKind::InvalidParameters, "all-pass poles must be positive");
  }
  // One state per entry: x_ij' = -a_ij x_ij + v_j, y_i += g_ij (2 a_ij x_ij - v_j), v = M u.
  const Eigen::Index n = p * p;
  RealMatrix a = RealMatrix::Zero(n, n);
  RealMatrix b(n, p);
  RealMatrix c = RealMatrix::Zero(p, n);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const Eigen::Index k = i * p + j;
      a(k, k) = -spec.pole(i, j);
      b.row(k) = spec.contraction.row(j);
      c(i, k) = 2.0 * spec.pole(i, j) * spec.gain(i, j);
    }
  }
  return {a, b, c, -spec.gain * spec.contraction};
}

double perturbation_bound(const PerturbationSpec& spec) {
  return spec.gain.norm() * max_singular_value(spec.contraction.cast<Complex>());
}

StateSpace perturbed_plant(const StateSpace& nominal, const StateSpace& w1, const StateSpace& delta) {
  const Eigen::Index p = nominal.outputs();
  const StateSpace factor =
      connect_parallel(StateSpace::gain(RealMatrix::Identity(p, p)), connect_series(w1, delta));
  return connect_series(nominal, factor);
}

PerturbedModelSet sample_perturbed_models(const StateSpace& nominal, const StateSpace& w1,
                                          int count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::InvalidParameters, "perturbation count must be >= 1");
  const Eigen::Index p = nominal.outputs();
  Rng rng(seed);
  PerturbedModelSet set;
  set.seed = seed;
  const double w_lo = 2.0 * std::numbers::pi * 1.0;
  const double w_hi = 2.0 * std::numbers::pi * 1000.0;
  for (int k = 0; k < count; ++k) {
    PerturbationSpec spec{RealMatrix(p, p), RealMatrix(p, p), RealMatrix(p, p)};
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        spec.gain(i, j) = rng.uniform(-1.0, 1.0);
        spec.pole(i, j) = w_lo * std::pow(w_hi / w_lo, rng.uniform());
        spec.contraction(i, j) = rng.normal();
      }
    }
    const double level = rng.uniform();
    const double gnorm = spec.gain.norm();
    spec.gain *= gnorm > 0.0 ? level / gnorm : 0.0;
    const double mnorm = max_singular_value(spec.contraction.cast<Complex>());
    if (mnorm > 0.0) spec.contraction /= mnorm;

    StateSpace delta = realize_perturbation(spec);
    StateSpace member = perturbed_plant(nominal, w1, delta);
    set.stable.push_back(is_stable(member));
    set.specs.push_back(std::move(spec));
    set.deltas.push_back(std::move(delta));
    set.members.push_back(std::move(member));
  }
  return set;
}

}  // namespace ltr
