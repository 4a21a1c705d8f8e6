#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ltr/ekf.hpp"
#include "ltr/identification.hpp"
#include "ltr/model_reduction.hpp"
#include "ltr/robustness.hpp"
#include "ltr/simulation.hpp"
#include "oracles/expected_values.hpp"
#include "support.hpp"

using namespace ltr;
using testing::gimbal_design;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTs = 5e-4;

RealMatrix scalar(double v) { return RealMatrix::Constant(1, 1, v); }

DiscreteStateSpace static_controller(const RealMatrix& gain, double ts) {
  const Eigen::Index p = gain.cols();
  const Eigen::Index m = gain.rows();
  return {RealMatrix(0, 0), RealMatrix(0, p), RealMatrix(m, 0), gain, ts};
}

const DiscreteStateSpace& digital_controller() {
  static const DiscreteStateSpace kd = bilinear_discretize(gimbal_design().design.at(1e-4).compensator, kTs);
  return kd;
}

double phase_deg(Complex a, Complex b) { return std::abs(std::arg(a / b)) * 180.0 / std::numbers::pi; }

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::ParseError;
}

}  // namespace

TEST_CASE("zero disturbance gives an identically zero trace") {
  DisturbanceProfile quiet;
  quiet.channels.resize(2);
  const SimulationTrace t = simulate_closed_loop(gimbal_design().plant, digital_controller(), quiet, 0.2);
  CHECK(t.time.size() == 400);
  CHECK(t.rate.cwiseAbs().maxCoeff() == 0.0);
  CHECK(t.angle.cwiseAbs().maxCoeff() == 0.0);
  CHECK(t.control.cwiseAbs().maxCoeff() == 0.0);
  CHECK(rms_los_error(t, 0.1).norm() == 0.0);
  for (std::size_t i = 1; i < t.time.size(); ++i) CHECK(t.time[i] - t.time[i - 1] == doctest::Approx(kTs));
}

TEST_CASE("simulation argument and blowup errors") {
  const StateSpace lag = tf_to_ss({{1.0}, {1.0, 1.0}});
  const DisturbanceProfile d = sinusoid_profile(1, 0, 1.0, 1.0);
  const DiscreteStateSpace destabilizing = static_controller(scalar(-10.0), 1e-3);
  CHECK(kind_of([&] { simulate_closed_loop(lag, destabilizing, d, 60.0); }) == ErrorKind::NumericalBlowup);
  CHECK(kind_of([&] { simulate_closed_loop(lag, static_controller(scalar(1.0), 1e-3), d, 0.05); }) ==
        ErrorKind::InvalidParameters);
  CHECK(kind_of([&] { swept_sine_identify(lag, destabilizing, {1.0}); }) == ErrorKind::UnstableClosedLoop);
  SweptSineOptions few;
  few.cycles = 12;
  CHECK(kind_of([&] { swept_sine_identify(lag, static_controller(scalar(1.0), 1e-3), {1.0}, few); }) ==
        ErrorKind::InsufficientCycles);
}

TEST_CASE("1 Hz azimuth sinusoid follows the analytic sensitivity") {
  const StateSpace& g = gimbal_design().plant;
  const double amp = 0.01;
  const SimulationTrace t = simulate_closed_loop(g, digital_controller(), sinusoid_profile(2, 0, amp, 1.0), 6.0);
  double peak = 0.0;
  double cross = 0.0;
  for (std::size_t i = 0; i < t.time.size(); ++i) {
    if (t.time[i] < 4.0) continue;
    peak = std::max(peak, std::abs(t.rate(static_cast<Eigen::Index>(i), 0)));
    cross = std::max(cross, std::abs(t.rate(static_cast<Eigen::Index>(i), 1)));
  }
  const LoopMaps maps = closed_loop_maps(g, gimbal_design().design.at(1e-4).compensator);
  const double want = std::abs(evaluate_at(maps.s_o, kTwoPi)(0, 0));
  CHECK(peak / amp == doctest::Approx(want).epsilon(0.02));
  CHECK(peak / amp == doctest::Approx(std::abs(sampled_sensitivity(g, digital_controller(), kTwoPi)(0, 0))).epsilon(0.02));
  CHECK(cross <= 1e-12);
}

TEST_CASE("swept sine recovers a known first-order sensitivity") {
  // G = 10/s with unit feedback: S = s/(s + 10).
  const StateSpace g = tf_to_ss({{10.0}, {1.0, 0.0}});
  const DiscreteStateSpace k = static_controller(scalar(1.0), 1e-4);
  const std::vector<double> grid{0.3, 1.0, 1.6, 3.0, 8.0};
  const IdentifiedResponse id = swept_sine_identify(g, k, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex s(0.0, kTwoPi * grid[i]);
    const Complex want = s / (s + 10.0);
    CHECK(std::abs(id.s[i](0, 0)) == doctest::Approx(std::abs(want)).epsilon(0.02));
    CHECK(phase_deg(id.s[i](0, 0), want) < 2.0);
    CHECK(id.sigma[i](0) == doctest::Approx(std::abs(id.s[i](0, 0))));
  }
}

TEST_CASE("swept sine with K = 0 identifies the identity") {
  const IdentifiedResponse id = swept_sine_identify(
      gimbal_design().plant, static_controller(RealMatrix::Zero(2, 2), kTs), {2.0, 20.0});
  for (const ComplexMatrix& s : id.s) CHECK((s - ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 0.02);
}

TEST_CASE("gimbal swept sine matches the sampled-data loop and sits under the weight") {
  const testing::GimbalDesign& d = gimbal_design();
  const std::vector<double> grid{1.0, 3.0, 10.0, 30.0, 100.0};
  SweptSineOptions opt;
  opt.workers = 2;
  const IdentifiedResponse id = swept_sine_identify(d.plant, digital_controller(), grid, opt);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = kTwoPi * grid[i];
    const ComplexMatrix want = sampled_sensitivity(d.plant, digital_controller(), w);
    for (int r = 0; r < 2; ++r) {
      CHECK(std::abs(id.s[i](r, r)) == doctest::Approx(std::abs(want(r, r))).epsilon(0.02));
      CHECK(phase_deg(id.s[i](r, r), want(r, r)) < 2.0);
    }
    CHECK(std::abs(id.s[i](0, 1)) <= 1e-9);
    CHECK(id.sigma[i](0) * std::abs(evaluate_at(d.we1, w)(0, 0)) < 1.0);
  }
}

TEST_CASE("swept sine is independent of the worker count") {
  const std::vector<double> grid{5.0, 50.0};
  SweptSineOptions serial;
  SweptSineOptions threaded;
  threaded.workers = 4;
  const IdentifiedResponse a = swept_sine_identify(gimbal_design().plant, digital_controller(), grid, serial);
  const IdentifiedResponse b = swept_sine_identify(gimbal_design().plant, digital_controller(), grid, threaded);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(a.s[i] == b.s[i]);
}

TEST_CASE("rms of a known angle signal") {
  SimulationTrace t;
  const int n = 4000;
  t.angle.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    t.time.push_back(i * 1e-3);
    t.angle(i, 0) = 3.0 + 50e-6 * std::sin(kTwoPi * 2.0 * i * 1e-3);
  }
  CHECK(rms_los_error(t, 1.0)(0) == doctest::Approx(50.0 / std::sqrt(2.0)).epsilon(1e-3));
  CHECK(kind_of([&] { rms_los_error(t, 10.0); }) == ErrorKind::InvalidParameters);
}

TEST_CASE("flat-spectrum disturbance rms matches the frequency-domain integral") {
  const testing::GimbalDesign& d = gimbal_design();
  const double spacing = 0.25;
  const double amp = 2e-3;
  DisturbanceProfile flat;
  flat.channels.resize(2);
  Rng rng(5);
  for (double f = 0.5; f <= 20.0 + 1e-9; f += spacing) {
    flat.channels[0].push_back({f, amp, rng.uniform(0.0, kTwoPi)});
    flat.channels[1].push_back({f, amp, rng.uniform(0.0, kTwoPi)});
  }
  const SimulationTrace t = simulate_closed_loop(d.plant, digital_controller(), flat, 12.0);
  const RealVector rms = rms_los_error(t, 4.0);
  const LoopMaps maps = closed_loop_maps(d.plant, d.design.at(1e-4).compensator);
  // One-sided PSD amp^2 / (2 spacing) per Hz over the band.
  const double psd = amp * amp / (2.0 * spacing);
  for (int axis = 0; axis < 2; ++axis) {
    double integral = 0.0;
    const int steps = 20000;
    const double lo = 0.5 - 0.5 * spacing;
    const double hi = 20.0 + 0.5 * spacing;
    for (int k = 0; k < steps; ++k) {
      const double f = lo + (hi - lo) * (k + 0.5) / steps;
      const double gain = std::abs(evaluate_at(maps.s_o, kTwoPi * f)(axis, axis)) / (kTwoPi * f);
      integral += gain * gain * psd * (hi - lo) / steps;
    }
    CHECK(rms(axis) == doctest::Approx(1e6 * std::sqrt(integral)).epsilon(0.10));
  }
}

TEST_CASE("default disturbance profile") {
  const DisturbanceProfile a = default_disturbance_profile(2, 7);
  const DisturbanceProfile b = default_disturbance_profile(2, 7);
  const DisturbanceProfile c = default_disturbance_profile(2, 8);
  REQUIRE(a.size() == 2);
  CHECK(a.channels[0].size() == 85);
  CHECK(a.channels[0][0].amplitude == doctest::Approx(0.02));
  CHECK(a.channels[0][4].amplitude == doctest::Approx(0.001));
  double tone_power = 0.0;
  double noise_power = 0.0;
  for (std::size_t i = 0; i < a.channels[0].size(); ++i) {
    const Tone& tone = a.channels[0][i];
    CHECK(tone.freq_hz <= 20.0);
    (i < 5 ? tone_power : noise_power) += 0.5 * tone.amplitude * tone.amplitude;
    CHECK(tone.phase == b.channels[0][i].phase);
  }
  CHECK(noise_power == doctest::Approx(0.1 * tone_power));
  CHECK(a.value(1.234) == b.value(1.234));
  CHECK(a.value(1.234) != c.value(1.234));
}

TEST_CASE("delay model comparison") {
  const DelayComparison low = compare_delay_models(0.0045, 4.0);
  CHECK(low.magnitude_ratio >= 0.99);
  CHECK(low.magnitude_ratio <= 1.01);
  CHECK(std::abs(low.phase_difference_deg) < 1.0);
  CHECK(low.magnitude_ratio == doctest::Approx(expected::delay_ratio_4hz).epsilon(1e-12));
  CHECK(low.phase_difference_deg == doctest::Approx(expected::delay_phase_deg_4hz).epsilon(1e-9));
  const DelayComparison dc = compare_delay_models(0.0045, 1e-6);
  CHECK(dc.magnitude_ratio == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(dc.phase_difference_deg) < 1e-6);
  const DelayComparison high = compare_delay_models(0.0045, 200.0);
  CHECK(std::abs(high.magnitude_ratio - 1.0) > 0.05);
  CHECK(high.magnitude_ratio == doctest::Approx(expected::delay_ratio_200hz).epsilon(1e-12));
  CHECK(high.phase_difference_deg == doctest::Approx(expected::delay_phase_deg_200hz).epsilon(1e-9));
}

TEST_CASE("EKF Jacobian matches central differences") {
  const GimbalAxisParams p = azimuth_params();
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    RealVector x(6);
    x << rng.normal(), rng.normal(), rng.normal(), rng.normal(), rng.uniform(0.05, 0.3), rng.uniform(0.5, 2.0);
    const double u = rng.normal();
    const RealMatrix jac = ekf_jacobian(p, x);
    RealMatrix fd(6, 6);
    for (int j = 0; j < 6; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
      RealVector up = x;
      RealVector dn = x;
      up(j) += h;
      dn(j) -= h;
      fd.col(j) = (ekf_dynamics(p, up, u) - ekf_dynamics(p, dn, u)) / (2.0 * h);
    }
    CHECK((jac - fd).cwiseAbs().maxCoeff() <= 1e-6 * jac.cwiseAbs().maxCoeff());
    CHECK(jac.bottomRows(2).norm() == 0.0);
  }
}

TEST_CASE("EKF prediction from rest") {
  EkfEstimate est;
  est.x(4) = 0.2;
  est.x(5) = 1.0;
  const RealMatrix qc = 1e-4 * RealMatrix::Identity(6, 6);
  // The gyro couples noise into its rate state at wg^2, so first order needs a very short step.
  const double dt = 1e-8;
  const EkfEstimate next = ekf_predict(azimuth_params(), est, 0.0, dt, qc, 1);
  CHECK(next.x.head(4).norm() == 0.0);
  CHECK(next.x(4) == 0.2);
  CHECK(next.x(5) == 1.0);
  CHECK((next.p.diagonal() - dt * qc.diagonal()).norm() <= 1e-3 * (dt * qc.diagonal()).norm());
  EkfEstimate bad = est;
  bad.x(4) = -1.0;
  const EkfEstimate clamped = ekf_predict(azimuth_params(), bad, 0.0, 1e-3, qc);
  CHECK(clamped.x(4) == kInertiaFloor);
  CHECK(clamped.inertia_clamps > 0);
}

TEST_CASE("EKF measurement update") {
  EkfEstimate est;
  est.x << 0.1, 0.2, 0.3, 0.4, 0.2, 1.0;
  const EkfEstimate same = ekf_update(est, 5.0, 1e-3);
  CHECK(same.x == est.x);
  est.p = RealMatrix::Identity(6, 6);
  EkfInnovation info;
  const EkfEstimate sharp = ekf_update(est, 2.0, 1e-12, &info);
  CHECK(sharp.x(0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(info.innovation == doctest::Approx(1.9));
  CHECK(info.variance > 0.0);
  CHECK((sharp.p - sharp.p.transpose()).norm() == 0.0);
  CHECK(kind_of([&] { ekf_update(est, 1.0, 0.0); }) == ErrorKind::InvalidParameters);
}

TEST_CASE("EKF converges on both axes with a healthy covariance") {
  for (const GimbalAxisParams& truth : {azimuth_params(), elevation_params()}) {
    const EkfRun run = estimate_parameters(truth);
    CHECK(run.final.x(4) == doctest::Approx(truth.j).epsilon(0.05));
    CHECK(run.final.x(5) == doctest::Approx(truth.bv).epsilon(0.05));
    CHECK(run.min_covariance_eigenvalue >= 0.0);
    CHECK(run.min_innovation_variance > 0.0);
    CHECK(run.max_asymmetry == 0.0);
    CHECK(run.final.inertia_clamps == 0);
    CHECK(run.time.size() == 20000);
  }
}

TEST_CASE("EKF started at the truth without noise stays there") {
  EkfRunOptions o;
  o.meas_noise_std = 0.0;
  o.init_scale = 1.0;
  o.duration = 2.0;
  const EkfRun run = estimate_parameters(azimuth_params(), o);
  CHECK(run.final.x(4) == doctest::Approx(azimuth_params().j).epsilon(1e-9));
  CHECK(run.final.x(5) == doctest::Approx(azimuth_params().bv).epsilon(1e-9));
}
