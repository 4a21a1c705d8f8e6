#include "ltr/ekf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ltr/random.hpp"

namespace ltr {

namespace {

double clamp_inertia(RealVector& x, int& clamps) {
  if (x(4) <= kInertiaFloor) {
    x(4) = kInertiaFloor;
    ++clamps;
  }
  return x(4);
}

/// Lag-model truth integrated with the same RK4 substeps as the filter.
RealVector truth_step(const GimbalAxisParams& p, const RealVector& x, double u, double dt, int substeps) {
  RealVector z(6);
  z << x, p.j, p.bv;
  const double h = dt / substeps;
  for (int s = 0; s < substeps; ++s) {
    const RealVector k1 = ekf_dynamics(p, z, u);
    const RealVector k2 = ekf_dynamics(p, z + 0.5 * h * k1, u);
    const RealVector k3 = ekf_dynamics(p, z + 0.5 * h * k2, u);
    const RealVector k4 = ekf_dynamics(p, z + h * k3, u);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return z.head(4);
}

}  // namespace

RealVector ekf_dynamics(const GimbalAxisParams& m, const RealVector& x, double u) {
  const double wg2 = m.wg * m.wg;
  RealVector f = RealVector::Zero(6);
  f(0) = x(1);
  f(1) = -wg2 * x(0) - 2.0 * m.xi * m.wg * x(1) + wg2 * x(2);
  f(2) = (-x(5) * x(2) + m.kt * x(3)) / x(4);
  f(3) = (-x(3) + m.ka * u) / m.d;
  return f;
}

RealMatrix ekf_jacobian(const GimbalAxisParams& m, const RealVector& x) {
  RealMatrix f = RealMatrix::Zero(6, 6);
  f(0, 1) = 1.0;
  f(1, 0) = -m.wg * m.wg;
  f(1, 1) = -2.0 * m.xi * m.wg;
  f(1, 2) = m.wg * m.wg;
  f(2, 2) = -x(5) / x(4);
  f(2, 3) = m.kt / x(4);
  f(2, 4) = (x(5) * x(2) - m.kt * x(3)) / (x(4) * x(4));
  f(2, 5) = -x(2) / x(4);
  f(3, 3) = -1.0 / m.d;
  return f;
}

EkfEstimate ekf_predict(const GimbalAxisParams& model, const EkfEstimate& est, double u, double dt,
                        const RealMatrix& process_noise, int substeps) {
  if (!(dt > 0.0) || substeps < 1) throw Error(ErrorKind::InvalidParameters, "dt must be positive");
  EkfEstimate out = est;
  clamp_inertia(out.x, out.inertia_clamps);
  const double h = dt / substeps;
  const auto cov_rate = [&](const RealVector& x, const RealMatrix& p) {
    const RealMatrix f = ekf_jacobian(model, x);
    return RealMatrix(f * p + p * f.transpose() + process_noise);
  };
  for (int s = 0; s < substeps; ++s) {
    const RealVector& x = out.x;
    const RealMatrix& p = out.p;
    const RealVector k1 = ekf_dynamics(model, x, u);
    const RealMatrix m1 = cov_rate(x, p);
    RealVector x2 = x + 0.5 * h * k1;
    clamp_inertia(x2, out.inertia_clamps);
    const RealVector k2 = ekf_dynamics(model, x2, u);
    const RealMatrix m2 = cov_rate(x2, p + 0.5 * h * m1);
    RealVector x3 = x + 0.5 * h * k2;
    clamp_inertia(x3, out.inertia_clamps);
    const RealVector k3 = ekf_dynamics(model, x3, u);
    const RealMatrix m3 = cov_rate(x3, p + 0.5 * h * m2);
    RealVector x4 = x + h * k3;
    clamp_inertia(x4, out.inertia_clamps);
    const RealVector k4 = ekf_dynamics(model, x4, u);
    const RealMatrix m4 = cov_rate(x4, p + h * m3);
    out.x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.p = symmetrize(p + (h / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4));
    clamp_inertia(out.x, out.inertia_clamps);
  }
  return out;
}

EkfEstimate ekf_update(const EkfEstimate& est, double y, double meas_noise, EkfInnovation* info) {
  if (!(meas_noise > 0.0)) throw Error(ErrorKind::InvalidParameters, "measurement noise must be positive");
  EkfEstimate out = est;
  const double innovation = y - est.x(0);
  const double s = est.p(0, 0) + meas_noise;
  const RealVector k = est.p.col(0) / s;
  out.x = est.x + k * innovation;
  RealMatrix ikh = RealMatrix::Identity(6, 6);
  ikh.col(0) -= k;
  out.p = symmetrize(ikh * est.p * ikh.transpose() + meas_noise * k * k.transpose());
  if (info != nullptr) *info = {innovation, s};
  return out;
}

EkfRun estimate_parameters(const GimbalAxisParams& truth, const EkfRunOptions& o) {
  truth.validate();
  if (!(o.duration > 0.0) || !(o.meas_dt > 0.0) || !(o.meas_noise_std >= 0.0)) {
    throw Error(ErrorKind::InvalidParameters, "invalid estimation run options");
  }
  const double r = o.filter_meas_variance > 0.0
                       ? o.filter_meas_variance
                       : std::max(o.meas_noise_std * o.meas_noise_std, 1e-12);
  RealMatrix qc = RealMatrix::Zero(6, 6);
  qc.diagonal().head(4).setConstant(o.state_process_noise);
  qc.diagonal().tail(2).setConstant(o.param_process_noise);

  EkfEstimate est;
  est.x(4) = o.init_scale * truth.j;
  est.x(5) = o.init_scale * truth.bv;
  est.p.diagonal() << 1.0, 1.0, 1.0, 1.0, std::pow(0.5 * est.x(4), 2), std::pow(0.5 * est.x(5), 2);

  Rng rng(o.seed);
  RealVector truth_x = RealVector::Zero(4);
  const auto steps = static_cast<long>(std::llround(o.duration / o.meas_dt));
  const double w = 2.0 * std::numbers::pi * o.excitation_hz;

  EkfRun run;
  run.time.reserve(static_cast<std::size_t>(steps));
  run.min_covariance_eigenvalue = std::numeric_limits<double>::infinity();
  run.min_innovation_variance = std::numeric_limits<double>::infinity();
  long rising = 0;
  long longest_rise = 0;
  double last_trace = est.p.trace();
  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * o.meas_dt;
    const double u = o.excitation_amplitude * std::sin(w * t);
    truth_x = truth_step(truth, truth_x, u, o.meas_dt, o.substeps);
    est = ekf_predict(truth, est, u, o.meas_dt, qc, o.substeps);
    const double y = truth_x(0) + o.meas_noise_std * rng.normal();
    EkfInnovation info;
    est = ekf_update(est, y, r, &info);
    run.min_innovation_variance = std::min(run.min_innovation_variance, info.variance);

    const double tr = est.p.trace();
    rising = tr > last_trace ? rising + 1 : 0;
    longest_rise = std::max(longest_rise, rising);
    last_trace = tr;
    if (!std::isfinite(tr) || !all_finite(est.x)) {
      throw Error(ErrorKind::DivergedFilter, "non-finite estimate at t = " + std::to_string(t) + " s");
    }
    if (k % 100 == 0 || k + 1 == steps) {
      Eigen::SelfAdjointEigenSolver<RealMatrix> es(est.p);
      run.min_covariance_eigenvalue = std::min(run.min_covariance_eigenvalue, es.eigenvalues().minCoeff());
      run.max_asymmetry = std::max(run.max_asymmetry, (est.p - est.p.transpose()).cwiseAbs().maxCoeff());
    }
    run.time.push_back(t + o.meas_dt);
    run.inertia.push_back(est.x(4));
    run.friction.push_back(est.x(5));
    run.covariance_trace.push_back(tr);
  }
  if (static_cast<double>(longest_rise) > 0.25 * static_cast<double>(steps)) {
    throw Error(ErrorKind::DivergedFilter, "covariance trace grew for " + std::to_string(longest_rise) +
                                               " consecutive steps");
  }
  run.final = est;
  return run;
}

}  // namespace ltr
