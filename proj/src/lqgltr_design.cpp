#include "ltr/lqgltr_design.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ltr/parallel.hpp"

namespace ltr {

void SensitivityWeightParams::validate() const {
  if (!(ms >= 1.0) || !(eps > 0.0 && eps < 1.0) || !(xi > 0.0 && xi <= 1.0) || !(wb > 0.0) ||
      !(gain > 0.0)) {
    throw Error(ErrorKind::InvalidParameters,
                "sensitivity weight needs Ms >= 1, 0 < eps < 1, 0 < xi <= 1, wb > 0, gain > 0");
  }
}

SensitivityWeightParams design1_weight_params() { return {}; }

SensitivityWeightParams design2_weight_params() {
  SensitivityWeightParams p;
  p.eps = 0.004;
  p.wb = 2.0 * std::numbers::pi * 15.0;
  return p;
}

TransferFunction make_sensitivity_weight(const SensitivityWeightParams& p) {
  p.validate();
  const double wb2 = p.wb * p.wb;
  return {{p.gain / p.ms, p.gain * 2.0 * p.xi * p.wb / std::sqrt(p.ms), p.gain * wb2},
          {1.0, 2.0 * p.xi * p.wb * std::sqrt(p.eps), wb2 * p.eps}};
}

StateSpace diagonal_weight(const TransferFunction& w, Eigen::Index channels) {
  const StateSpace single = balance_states(tf_to_ss(w));
  StateSpace out = single;
  for (Eigen::Index i = 1; i < channels; ++i) out = connect_diagonal(out, single);
  return out;
}

AugmentedPlant augment_plant(const StateSpace& plant, const StateSpace& weight) {
  const Eigen::Index p = plant.outputs();
  if (weight.outputs() != p || weight.inputs() != p) {
    throw Error(ErrorKind::DimensionMismatch, "weight must be square with the plant output count");
  }
  AugmentedPlant aug;
  aug.plant = plant;
  aug.n_plant = plant.order();
  aug.n_weight = weight.order();
  const Eigen::Index n = aug.n_plant + aug.n_weight;
  const Eigen::Index m = plant.inputs();

  RealMatrix a = RealMatrix::Zero(n, n);
  a.topLeftCorner(aug.n_plant, aug.n_plant) = plant.a;
  a.bottomRightCorner(aug.n_weight, aug.n_weight) = weight.a;
  RealMatrix b = RealMatrix::Zero(n, m);
  b.topRows(aug.n_plant) = plant.b;
  RealMatrix c(p, n);
  c << plant.c, weight.c;
  aug.model = StateSpace(a, b, c, RealMatrix::Zero(p, m));
  aug.gamma = RealMatrix::Zero(n, weight.inputs());
  aug.gamma.bottomRows(aug.n_weight) = weight.b;
  aug.weight_feedthrough = weight.d;
  return aug;
}

void NoiseIntensities::validate() const {
  const auto psd = [](const RealMatrix& m, bool strict) {
    if (m.rows() != m.cols()) return false;
    if (m.size() == 0) return true;
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(symmetrize(m));
    const double lo = es.eigenvalues().minCoeff();
    return strict ? lo > 0.0 : lo >= -1e-12 * std::max(1.0, m.norm());
  };
  if (!psd(w, false) || !psd(v, true) || !psd(theta_cov, true) || v.rows() != theta_cov.rows()) {
    throw Error(ErrorKind::InvalidParameters, "noise intensities need W >= 0, V > 0, theta > 0");
  }
}

NoiseIntensities default_noise(Eigen::Index process_inputs, Eigen::Index outputs, double theta) {
  return {RealMatrix::Identity(process_inputs, process_inputs),
          RealMatrix::Identity(outputs, outputs), theta * RealMatrix::Identity(outputs, outputs)};
}

KalmanDesign design_kalman(const AugmentedPlant& aug, const NoiseIntensities& noise,
                           const Tolerances& tol) {
  noise.validate();
  const RealMatrix& a = aug.model.a;
  const RealMatrix& c = aug.model.c;
  if (noise.w.rows() != aug.gamma.cols() || noise.v.rows() != c.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "noise intensities do not match the augmented plant");
  }
  const RealMatrix xi = noise.v + noise.theta_cov;
  const RealMatrix qn = symmetrize(aug.gamma * noise.w * aug.gamma.transpose());
  CareSolution sol = solve_care(a.transpose(), c.transpose(), qn, xi, tol);
  KalmanDesign k;
  k.covariance = sol.x;
  k.report = sol.report;
  k.kf = xi.llt().solve(c * sol.x).transpose();
  k.filter_loop = StateSpace(a, k.kf, c, RealMatrix::Zero(c.rows(), c.rows()));
  return k;
}

LqrDesign design_lqr(const AugmentedPlant& aug, double rho, const Tolerances& tol) {
  if (!(rho > 0.0)) throw Error(ErrorKind::InvalidParameters, "rho must be positive");
  const RealMatrix& a = aug.model.a;
  const RealMatrix& b = aug.model.b;
  const RealMatrix& c = aug.model.c;
  const Eigen::Index m = b.cols();
  CareSolution sol = solve_care(a, b, c.transpose() * c, rho * RealMatrix::Identity(m, m), tol);
  LqrDesign l;
  l.riccati = sol.x;
  l.report = sol.report;
  l.kc = b.transpose() * sol.x / rho;
  l.loop = StateSpace(a, b, l.kc, RealMatrix::Zero(m, m));
  return l;
}

StateSpace assemble_lqg(const AugmentedPlant& aug, const RealMatrix& kf, const RealMatrix& kc) {
  const RealMatrix& a = aug.model.a;
  const RealMatrix& b = aug.model.b;
  const RealMatrix& c = aug.model.c;
  if (kf.rows() != a.rows() || kf.cols() != c.rows() || kc.rows() != b.cols() ||
      kc.cols() != a.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "gain dimensions do not match the augmented plant");
  }
  return {a - b * kc - kf * c, kf, kc, RealMatrix::Zero(kc.rows(), kf.cols())};
}

const RhoDesign& LqgLtrDesign::at(double rho) const {
  for (const auto& d : by_rho) {
    if (std::abs(d.rho - rho) <= 1e-12 * std::abs(rho)) return d;
  }
  throw Error(ErrorKind::InvalidParameters, "no design for the requested rho");
}

double recovery_error(const StateSpace& plant, const StateSpace& compensator,
                      const StateSpace& filter_loop, const std::vector<double>& omega) {
  double num = 0.0;
  double den = 0.0;
  for (double w : omega) {
    const ComplexMatrix target = evaluate(filter_loop, {0.0, w});
    const ComplexMatrix loop = evaluate(plant, {0.0, w}) * evaluate(compensator, {0.0, w});
    num = std::max(num, max_singular_value(loop - target));
    den = std::max(den, max_singular_value(target));
  }
  return num / std::max(den, 1e-12);
}

LqgLtrDesign ltr_sweep(const AugmentedPlant& aug, const KalmanDesign& kalman,
                       const std::vector<double>& rhos, const SweepOptions& options) {
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    if (!(rhos[i] > 0.0) || (i > 0 && !(rhos[i] < rhos[i - 1]))) {
      throw Error(ErrorKind::InvalidParameters, "rho list must be positive and descending");
    }
  }
  const std::vector<double> omega = log_grid(options.recovery_band);
  LqgLtrDesign design{aug, kalman, std::vector<RhoDesign>(rhos.size())};
  parallel_for(rhos.size(), options.workers, [&](std::size_t i) {
    RhoDesign& d = design.by_rho[i];
    d.rho = rhos[i];
    try {
      const LqrDesign lqr = design_lqr(aug, rhos[i], options.tolerances);
      d.kc = lqr.kc;
      d.compensator = assemble_lqg(aug, kalman.kf, lqr.kc);
      const StateSpace closed = connect_feedback(aug.plant, d.compensator);
      const ComplexVector ev = eigenvalues(closed.a);
      d.closed_loop_max_real = ev.real().maxCoeff();
      d.closed_loop_min_real = ev.real().minCoeff();
      d.stable = d.closed_loop_max_real < 0.0;
      d.recovery_error = recovery_error(aug.plant, d.compensator, kalman.filter_loop, omega);
    } catch (const Error& e) {
      d.failure = e.what();
      d.stable = false;
    }
  });
  return design;
}

LqgLtrDesign design_lqg_ltr(const StateSpace& plant, const StateSpace& weight,
                            const NoiseIntensities& noise, const std::vector<double>& rhos,
                            const SweepOptions& options) {
  const AugmentedPlant aug = augment_plant(plant, weight);
  const KalmanDesign kalman = design_kalman(aug, noise, options.tolerances);
  return ltr_sweep(aug, kalman, rhos, options);
}

}  // namespace ltr
