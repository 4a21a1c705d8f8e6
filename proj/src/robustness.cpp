#include "ltr/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ltr/parallel.hpp"

namespace ltr {

namespace {

StateSpace loop_gain(const StateSpace& g, const StateSpace& k) { return connect_series(k, g); }

double gain_at(const StateSpace& sys, double omega) {
  if (std::isinf(omega)) return max_singular_value(sys.d.cast<Complex>());
  return max_singular_value(evaluate(sys, {0.0, omega}));
}

TestResult from_peak(const HinfResult& h) { return {h.value, h.omega, h.value < 1.0}; }

}  // namespace

LoopMaps closed_loop_maps(const StateSpace& g, const StateSpace& k) {
  const Eigen::Index p = g.outputs();
  const StateSpace l = loop_gain(g, k);
  LoopMaps maps;
  maps.s_o = connect_feedback(StateSpace::gain(RealMatrix::Identity(p, p)), l);
  maps.t_o = connect_feedback(l, StateSpace::gain(RealMatrix::Identity(p, p)));
  const ComplexVector ev = eigenvalues(maps.t_o.a);
  if (ev.size() > 0 && ev.real().maxCoeff() >= 0.0) {
    std::ostringstream msg;
    msg << "closed loop has eigenvalues with nonnegative real part:";
    for (const Complex& z : ev) {
      if (z.real() >= 0.0) msg << ' ' << z;
    }
    throw Error(ErrorKind::UnstableClosedLoop, msg.str());
  }
  return maps;
}

TestResult nominal_performance(const StateSpace& we, const StateSpace& s_o,
                               const FrequencyGridSpec& band) {
  return from_peak(hinf_norm_peak(connect_series(s_o, we), {band}));
}

TestResult robust_stability(const StateSpace& w1, const StateSpace& t_o,
                            const FrequencyGridSpec& band) {
  return from_peak(hinf_norm_peak(connect_series(t_o, w1), {band}));
}

TestResult robust_performance(const StateSpace& we, const StateSpace& s_o, const StateSpace& w1,
                              const StateSpace& t_o, const FrequencyGridSpec& band,
                              std::vector<double>* trace) {
  const StateSpace ws = connect_series(s_o, we);
  const StateSpace wt = connect_series(t_o, w1);
  const auto sum = [&](double omega) { return gain_at(ws, omega) + gain_at(wt, omega); };

  const std::vector<double> grid = log_grid(band);
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = sum(grid[i]);
  const auto peak = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
  TestResult best{values[peak], grid[peak], false};

  const HinfResult np = hinf_norm_peak(ws, {band});
  const HinfResult rs = hinf_norm_peak(wt, {band});
  for (double omega : {0.0, np.omega, rs.omega, std::numeric_limits<double>::infinity()}) {
    const double v = sum(omega);
    if (v > best.value) best = {v, omega, false};
  }

  const double lo = std::log(grid[peak > 0 ? peak - 1 : 0]);
  const double hi = std::log(grid[std::min(peak + 1, grid.size() - 1)]);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo;
  double b = hi;
  for (int it = 0; it < 100 && b - a > 1e-10; ++it) {
    const double x1 = b - g * (b - a);
    const double x2 = a + g * (b - a);
    if (sum(std::exp(x1)) < sum(std::exp(x2))) {
      a = x1;
    } else {
      b = x2;
    }
  }
  const double xm = std::exp(0.5 * (a + b));
  if (const double v = sum(xm); v > best.value) best = {v, xm, false};

  best.pass = best.value < 1.0;
  if (trace != nullptr) *trace = std::move(values);
  return best;
}

RobustnessReport analyze_robustness(const StateSpace& g, const StateSpace& k, const StateSpace& we,
                                    const StateSpace& w1, const FrequencyGridSpec& band,
                                    std::size_t workers) {
  const LoopMaps maps = closed_loop_maps(g, k);
  RobustnessReport r;
  r.omega = log_grid(band);
  const StateSpace ws = connect_series(maps.s_o, we);
  const StateSpace wt = connect_series(maps.t_o, w1);
  r.np_trace.resize(r.omega.size());
  r.rs_trace.resize(r.omega.size());
  r.rp_trace.resize(r.omega.size());
  parallel_for(r.omega.size(), workers, [&](std::size_t i) {
    r.np_trace[i] = gain_at(ws, r.omega[i]);
    r.rs_trace[i] = gain_at(wt, r.omega[i]);
    r.rp_trace[i] = r.np_trace[i] + r.rs_trace[i];
  });
  r.np = nominal_performance(we, maps.s_o, band);
  r.rs = robust_stability(w1, maps.t_o, band);
  r.rp = robust_performance(we, maps.s_o, w1, maps.t_o, band);
  return r;
}

double closed_loop_abscissa(const StateSpace& g, const StateSpace& k) {
  return spectral_abscissa(connect_feedback(g, k).a);
}

DestabilizationWitness destabilization_witness(const StateSpace& g, const StateSpace& k,
                                               const StateSpace& w1, const FrequencyGridSpec& band) {
  const LoopMaps maps = closed_loop_maps(g, k);
  const StateSpace wt = connect_series(maps.t_o, w1);
  const HinfResult rs = hinf_norm_peak(wt, {band});
  if (!(rs.value > 0.0) || !std::isfinite(rs.omega) || rs.omega <= 0.0) {
    throw Error(ErrorKind::InvalidParameters,
                "robust-stability peak must be positive and at a finite nonzero frequency");
  }
  const double w0 = rs.omega;
  const ComplexMatrix m0 = evaluate(wt, {0.0, w0});
  Eigen::JacobiSVD<ComplexMatrix> svd(m0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double sigma = svd.singularValues()(0);
  // Delta0 = -v u^H / sigma gives Delta0 W1 T v = -v at w0.
  const ComplexMatrix target =
      -svd.matrixV().col(0) * svd.matrixU().col(0).adjoint() / sigma;

  const Eigen::Index p = g.outputs();
  DestabilizationWitness w;
  w.rs_peak = rs.value;
  w.omega = w0;
  w.spec = {RealMatrix(p, p), RealMatrix(p, p), RealMatrix::Identity(p, p)};
  const double a_max = 1e6 * w0;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const Complex c = target(i, j);
      const double phi = std::arg(c);
      // (a - jw)/(a + jw) has phase -2 atan(w/a) in (-pi, 0); a sign flip covers (0, pi).
      const double sign = phi <= 0.0 ? 1.0 : -1.0;
      const double half = phi <= 0.0 ? -0.5 * phi : 0.5 * (std::numbers::pi - phi);
      const double t = std::tan(half);
      w.spec.gain(i, j) = sign * std::abs(c);
      w.spec.pole(i, j) = t > w0 / a_max ? w0 / t : a_max;
    }
  }

  const auto abscissa_at = [&](double scale) {
    PerturbationSpec s = w.spec;
    s.gain *= scale;
    return closed_loop_abscissa(perturbed_plant(g, w1, realize_perturbation(s)), k);
  };
  w.abscissa_below = abscissa_at(0.99);
  for (double scale : {1.01, 1.02, 1.05, 1.1}) {
    const double x = abscissa_at(scale);
    if (x > 0.0) {
      w.unstable_scale = scale;
      w.abscissa_above = x;
      break;
    }
  }
  return w;
}

}  // namespace ltr
