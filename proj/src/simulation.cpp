#include "ltr/simulation.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

#include "ltr/random.hpp"

namespace ltr {

std::string_view to_string(DisturbanceKind kind) {
  switch (kind) {
    case DisturbanceKind::Sinusoid: return "sinusoid";
    case DisturbanceKind::Multisine: return "multisine";
    case DisturbanceKind::BandLimitedNoise: return "band-limited-noise";
  }
  return "unknown";
}

void DisturbanceProfile::value(double t, RealVector& out) const {
  out.resize(size());
  for (std::size_t i = 0; i < channels.size(); ++i) {
    double acc = 0.0;
    for (const Tone& tone : channels[i]) {
      acc += tone.amplitude * std::sin(2.0 * std::numbers::pi * tone.freq_hz * t + tone.phase);
    }
    out(static_cast<Eigen::Index>(i)) = acc;
  }
}

RealVector DisturbanceProfile::value(double t) const {
  RealVector out;
  value(t, out);
  return out;
}

DisturbanceProfile sinusoid_profile(Eigen::Index channels, Eigen::Index axis, double amplitude,
                                    double freq_hz, double phase) {
  if (axis < 0 || axis >= channels) throw Error(ErrorKind::InvalidParameters, "axis out of range");
  DisturbanceProfile p;
  p.kind = DisturbanceKind::Sinusoid;
  p.channels.resize(static_cast<std::size_t>(channels));
  p.channels[static_cast<std::size_t>(axis)].push_back({freq_hz, amplitude, phase});
  return p;
}

DisturbanceProfile default_disturbance_profile(Eigen::Index channels, std::uint64_t seed,
                                               const DefaultProfileParams& params) {
  if (params.tone_freqs_hz.empty() || !(params.noise_spacing_hz > 0.0) ||
      !(params.noise_band_hi_hz >= params.noise_band_lo_hz)) {
    throw Error(ErrorKind::InvalidParameters, "invalid disturbance profile parameters");
  }
  DisturbanceProfile p;
  p.kind = DisturbanceKind::BandLimitedNoise;
  p.seed = seed;
  p.channels.resize(static_cast<std::size_t>(channels));
  Rng rng(seed);
  const double f0 = params.tone_freqs_hz.front();
  for (auto& ch : p.channels) {
    double power = 0.0;
    for (double f : params.tone_freqs_hz) {
      const double a = params.reference_amplitude * f0 / f;
      ch.push_back({f, a, 0.0});
      power += 0.5 * a * a;
    }
    const auto count = static_cast<int>(
        std::floor((params.noise_band_hi_hz - params.noise_band_lo_hz) / params.noise_spacing_hz + 1e-9)) + 1;
    const double a = std::sqrt(2.0 * params.noise_power_fraction * power / count);
    for (int k = 0; k < count; ++k) {
      const double f = params.noise_band_lo_hz + k * params.noise_spacing_hz;
      ch.push_back({f, a, rng.uniform(0.0, 2.0 * std::numbers::pi)});
    }
  }
  return p;
}

namespace {

/// Shared RK4/ZOH loop; records a trace and/or accumulates correlation integrals.
class LoopRunner {
 public:
  LoopRunner(const StateSpace& plant, const DiscreteStateSpace& ctrl, const DisturbanceProfile& dist,
             const SimulationOptions& options, const CorrelationWindow* window)
      : g_(plant), k_(ctrl), dist_(dist), opt_(options), window_(window) {
    if (ctrl.inputs() != plant.outputs() || ctrl.outputs() != plant.inputs() ||
        dist.size() != plant.outputs()) {
      throw Error(ErrorKind::DimensionMismatch, "plant, controller and disturbance sizes differ");
    }
    if (opt_.substeps < 1) throw Error(ErrorKind::InvalidParameters, "substeps must be >= 1");
    n_ = plant.order();
    p_ = plant.outputs();
    const Eigen::Index corr = window_ != nullptr ? 2 * p_ : 0;
    z_ = RealVector::Zero(n_ + p_ + corr);
    xc_ = RealVector::Zero(ctrl.order());
    u_ = RealVector::Zero(plant.inputs());
    const RealMatrix loop = RealMatrix::Identity(p_, p_) + plant.d * ctrl.d;
    loop_lu_ = Eigen::FullPivLU<RealMatrix>(loop);
    if (!loop_lu_.isInvertible()) throw Error(ErrorKind::AlgebraicLoop, "I + D Dk is singular");
  }

  /// Controller sample at t_k followed by plant integration to t_{k+1}.
  void step(long k, SimulationTrace* trace) {
    const double ts = k_.sample_period;
    const double t = static_cast<double>(k) * ts;
    dist_.value(t, d_);
    const RealVector x = z_.head(n_);
    const RealVector y = loop_lu_.solve(g_.c * x - g_.d * (k_.c * xc_) + d_);
    u_ = -(k_.c * xc_ + k_.d * y);
    if (trace != nullptr) {
      const auto row = static_cast<Eigen::Index>(trace->time.size());
      trace->time.push_back(t);
      trace->rate.row(row) = y.transpose();
      trace->control.row(row) = u_.transpose();
      trace->disturbance.row(row) = d_.transpose();
      trace->angle.row(row) = z_.segment(n_, p_).transpose();
    }
    xc_ = k_.a * xc_ + k_.b * y;

    const double h = ts / opt_.substeps;
    for (int s = 0; s < opt_.substeps; ++s) {
      const double a = t + s * h;
      const double b = (s + 1 == opt_.substeps) ? static_cast<double>(k + 1) * ts : a + h;
      integrate(a, b);
    }
    if (!all_finite(RealMatrix(z_)) || z_.cwiseAbs().maxCoeff() > opt_.blowup_threshold ||
        (xc_.size() > 0 && xc_.cwiseAbs().maxCoeff() > opt_.blowup_threshold)) {
      throw Error(ErrorKind::NumericalBlowup,
                  "state exceeded " + std::to_string(opt_.blowup_threshold) + " at t = " +
                      std::to_string(static_cast<double>(k + 1) * ts) + " s");
    }
  }

  [[nodiscard]] const RealVector& state() const { return z_; }

 private:
  void integrate(double a, double b) {
    if (window_ != nullptr) {
      for (double edge : {window_->t0, window_->t1}) {
        if (edge > a && edge < b) {
          integrate(a, edge);
          integrate(edge, b);
          return;
        }
      }
    }
    const double mid = 0.5 * (a + b);
    const bool gate = window_ != nullptr && mid >= window_->t0 && mid <= window_->t1;
    const double h = b - a;
    const RealVector k1 = deriv(a, z_, gate);
    const RealVector k2 = deriv(a + 0.5 * h, z_ + 0.5 * h * k1, gate);
    const RealVector k3 = deriv(a + 0.5 * h, z_ + 0.5 * h * k2, gate);
    const RealVector k4 = deriv(b, z_ + h * k3, gate);
    z_ += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  RealVector deriv(double t, const RealVector& z, bool gate) {
    RealVector dz = RealVector::Zero(z.size());
    const auto x = z.head(n_);
    dist_.value(t, dd_);
    const RealVector y = g_.c * x + g_.d * u_ + dd_;
    dz.head(n_) = g_.a * x + g_.b * u_;
    dz.segment(n_, p_) = y;
    if (gate) {
      const double wt = window_->omega * t;
      dz.segment(n_ + p_, p_) = y * std::cos(wt);
      dz.segment(n_ + 2 * p_, p_) = y * std::sin(wt);
    }
    return dz;
  }

  const StateSpace& g_;
  const DiscreteStateSpace& k_;
  const DisturbanceProfile& dist_;
  SimulationOptions opt_;
  const CorrelationWindow* window_;
  Eigen::Index n_ = 0;
  Eigen::Index p_ = 0;
  RealVector z_;
  RealVector xc_;
  RealVector u_;
  RealVector d_;
  RealVector dd_;
  Eigen::FullPivLU<RealMatrix> loop_lu_;
};

long step_count(double duration, double ts) {
  return static_cast<long>(std::ceil(duration / ts - 1e-9));
}

}  // namespace

SimulationTrace simulate_closed_loop(const StateSpace& plant, const DiscreteStateSpace& controller,
                                     const DisturbanceProfile& dist, double duration,
                                     const SimulationOptions& options) {
  const double ts = controller.sample_period;
  if (!(duration >= 100.0 * ts)) {
    throw Error(ErrorKind::InvalidParameters, "duration must cover at least 100 controller periods");
  }
  LoopRunner runner(plant, controller, dist, options, nullptr);
  const long steps = step_count(duration, ts);
  SimulationTrace trace;
  trace.time.reserve(static_cast<std::size_t>(steps));
  trace.rate.resize(steps, plant.outputs());
  trace.control.resize(steps, plant.inputs());
  trace.disturbance.resize(steps, plant.outputs());
  trace.angle.resize(steps, plant.outputs());
  for (long k = 0; k < steps; ++k) runner.step(k, &trace);
  return trace;
}

ComplexVector simulate_phasor(const StateSpace& plant, const DiscreteStateSpace& controller,
                              const DisturbanceProfile& dist, const CorrelationWindow& window,
                              const SimulationOptions& options) {
  if (!(window.t1 > window.t0) || window.t0 < 0.0) {
    throw Error(ErrorKind::InvalidParameters, "correlation window must satisfy 0 <= t0 < t1");
  }
  LoopRunner runner(plant, controller, dist, options, &window);
  const long steps = step_count(window.t1, controller.sample_period);
  for (long k = 0; k < steps; ++k) runner.step(k, nullptr);
  const Eigen::Index n = plant.order();
  const Eigen::Index p = plant.outputs();
  const RealVector& z = runner.state();
  const double scale = 2.0 / (window.t1 - window.t0);
  ComplexVector out(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    out(i) = scale * Complex(z(n + p + i), -z(n + 2 * p + i));
  }
  return out;
}

RealVector rms_los_error(const SimulationTrace& trace, double settle) {
  const Eigen::Index p = trace.angle.cols();
  std::size_t first = 0;
  while (first < trace.time.size() && trace.time[first] < settle) ++first;
  const auto count = static_cast<Eigen::Index>(trace.time.size() - first);
  if (count < 2) throw Error(ErrorKind::InvalidParameters, "duration must exceed the settle time");
  const RealMatrix tail = trace.angle.bottomRows(count);
  RealVector rms(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const RealVector col = tail.col(i);
    const double mean = col.mean();
    rms(i) = 1e6 * std::sqrt((col.array() - mean).square().mean());
  }
  return rms;
}

DiscreteStateSpace zoh_discretize(const StateSpace& sys, double ts) {
  if (!(ts > 0.0)) throw Error(ErrorKind::InvalidParameters, "sample period must be positive");
  const Eigen::Index n = sys.order();
  const Eigen::Index m = sys.inputs();
  RealMatrix block = RealMatrix::Zero(n + m, n + m);
  block.topLeftCorner(n, n) = sys.a * ts;
  block.topRightCorner(n, m) = sys.b * ts;
  const RealMatrix e = block.exp();
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m), sys.c, sys.d, ts};
}

ComplexMatrix sampled_sensitivity(const StateSpace& plant, const DiscreteStateSpace& controller,
                                  double omega) {
  const double ts = controller.sample_period;
  const Eigen::Index p = plant.outputs();
  const Complex hold = omega == 0.0 ? Complex(1.0)
                                    : (1.0 - std::exp(Complex(0.0, -omega * ts))) /
                                          Complex(0.0, omega * ts);
  const ComplexMatrix g = evaluate(plant, {0.0, omega});
  const ComplexMatrix gd = evaluate_at(zoh_discretize(plant, ts), omega);
  const ComplexMatrix kd = evaluate_at(controller, omega);
  const ComplexMatrix inner = (ComplexMatrix::Identity(p, p) + gd * kd).partialPivLu().inverse();
  return ComplexMatrix::Identity(p, p) - hold * g * kd * inner;
}

double sampled_loop_spectral_radius(const StateSpace& plant, const DiscreteStateSpace& controller) {
  const DiscreteStateSpace gd = zoh_discretize(plant, controller.sample_period);
  const Eigen::Index n = gd.order();
  const Eigen::Index nc = controller.order();
  const Eigen::Index p = gd.outputs();
  const RealMatrix e = (RealMatrix::Identity(p, p) + gd.d * controller.d).inverse();
  // y = E (C x - D Ck xc), u = -Ck xc - Dk y
  const RealMatrix y_x = e * gd.c;
  const RealMatrix y_xc = -e * gd.d * controller.c;
  const RealMatrix u_x = -controller.d * y_x;
  const RealMatrix u_xc = -controller.c - controller.d * y_xc;
  RealMatrix a(n + nc, n + nc);
  a << gd.a + gd.b * u_x, gd.b * u_xc, controller.b * y_x, controller.a + controller.b * y_xc;
  const ComplexVector ev = eigenvalues(a);
  return ev.size() == 0 ? 0.0 : ev.cwiseAbs().maxCoeff();
}

RealVector rms_oracle(const std::function<ComplexMatrix(double)>& sensitivity,
                      const DisturbanceProfile& dist) {
  const Eigen::Index p = dist.size();
  std::map<double, ComplexVector> phasors;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (const Tone& tone : dist.channels[static_cast<std::size_t>(i)]) {
      if (tone.freq_hz <= 0.0) continue;
      auto [it, inserted] = phasors.try_emplace(tone.freq_hz, ComplexVector::Zero(p));
      // a sin(wt + phi) = Re(-j a e^{j phi} e^{j w t})
      it->second(i) += Complex(0.0, -tone.amplitude) * std::exp(Complex(0.0, tone.phase));
    }
  }
  RealVector mean_square = RealVector::Zero(p);
  for (const auto& [f, d] : phasors) {
    const double omega = 2.0 * std::numbers::pi * f;
    const ComplexVector angle = sensitivity(omega) * d / Complex(0.0, omega);
    mean_square += 0.5 * angle.cwiseAbs2();
  }
  return 1e6 * mean_square.cwiseSqrt();
}

}  // namespace ltr
