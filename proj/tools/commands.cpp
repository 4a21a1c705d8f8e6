#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "ltr/ekf.hpp"
#include "ltr/gimbal_model.hpp"
#include "ltr/identification.hpp"
#include "ltr/lqgltr_design.hpp"
#include "ltr/model_reduction.hpp"
#include "ltr/robustness.hpp"
#include "ltr/simulation.hpp"
#include "ltr/text_io.hpp"

namespace cli {

namespace {

using Json = nlohmann::ordered_json;
using ltr::RealMatrix;
using ltr::StateSpace;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kIdentifyStride = 10;

/// Which command writes each intermediate file, for dependency messages.
const std::map<std::string, std::string>& producers() {
  static const std::map<std::string, std::string> m{
      {"design.txt", "design"}, {"reduced.txt", "reduce"}, {"controller.txt", "discretize"}};
  return m;
}

std::string label(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

/// One command invocation: output files, inputs read and the manifest.
class Run {
 public:
  Run(std::string command, const ProjectConfig& config)
      : command_(std::move(command)), config_(config), hash_(config_hash(config)), dir_(config.output_dir) {
    std::filesystem::create_directories(dir_);
  }

  const ProjectConfig& config() const { return config_; }

  void write(const std::string& file, const std::string& kind, const std::function<void(std::ostream&)>& body) {
    std::ostringstream os;
    ltr::write_preamble(os, kind, hash_);
    body(os);
    save(file, os.str());
    files_.push_back(file);
  }

  /// Contents of an upstream file; MissingDependency when absent or produced by another config.
  std::string read(const std::string& file) {
    const std::filesystem::path path = dir_ / file;
    const std::string producer = producers().at(file);
    std::ifstream in(path);
    if (!in) throw MissingDependency(path.string() + " not found; run '" + producer + "' first");
    std::ostringstream text;
    text << in.rdbuf();
    std::istringstream header(text.str());
    const std::string stored = ltr::read_config_hash(header);
    if (stored != hash_) {
      throw MissingDependency(path.string() + " was produced with config hash '" + stored + "', current is " +
                              hash_ + "; rerun '" + producer + "'");
    }
    inputs_.push_back(file);
    return text.str();
  }

  StateSpace read_state_space(const std::string& file, const std::string& name) {
    std::istringstream is(read(file));
    return ltr::read_state_space(is, name);
  }

  Json results = Json::object();

  void finish() {
    Json m;
    m["command"] = command_;
    m["version"] = kVersion;
    m["schema_version"] = kSchemaVersion;
    m["config_hash"] = hash_;
    m["seeds"] = {{"simulation", config_.disturbance.seed},
                  {"perturbation", config_.sweep.perturbation_seed},
                  {"identification", config_.ekf.seed}};
    m["inputs"] = inputs_;
    m["files"] = files_;
    m["results"] = results;
    save(command_ + ".json", m.dump(2) + "\n");
  }

 private:
  void save(const std::string& file, const std::string& text) const {
    std::ofstream out(dir_ / file, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + (dir_ / file).string());
  }

  std::string command_;
  const ProjectConfig& config_;
  std::string hash_;
  std::filesystem::path dir_;
  std::vector<std::string> files_;
  std::vector<std::string> inputs_;
};

StateSpace plant(const ProjectConfig& c) { return ltr::build_mimo_model(c.azimuth, c.elevation, c.delay); }

StateSpace weight(const ltr::SensitivityWeightParams& p) {
  return ltr::diagonal_weight(ltr::make_sensitivity_weight(p), 2);
}

std::vector<double> to_hz(const std::vector<double>& omega) {
  std::vector<double> hz;
  for (double w : omega) hz.push_back(w / kTwoPi);
  return hz;
}

Json test_json(const ltr::TestResult& t) {
  return {{"value", t.value}, {"frequency_hz", t.omega / kTwoPi}, {"pass", t.pass}};
}

void model(Run& run) {
  const ProjectConfig& c = run.config();
  const StateSpace g = plant(c);
  const ltr::UncertaintyWeights w = ltr::uncertainty_weights();
  run.write("model.txt", "model", [&](std::ostream& os) {
    ltr::write_state_space(os, "plant", g);
    ltr::write_state_space(os, "uncertainty_weight", w.w1);
    ltr::write_state_space(os, "shaping_weight", weight(c.design_weight));
    ltr::write_state_space(os, "performance_weight", weight(c.performance_weight));
  });
  const std::vector<double> omega = ltr::log_grid(c.grid);
  run.write("model_response.txt", "plant frequency response",
            [&](std::ostream& os) { ltr::write_frequency_response(os, ltr::frequency_response(g, omega, c.workers)); });
  RealMatrix delay(static_cast<Eigen::Index>(omega.size()), 5);
  for (std::size_t i = 0; i < omega.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double f = omega[i] / kTwoPi;
    const ltr::DelayComparison az = ltr::compare_delay_models(c.azimuth.d, f);
    const ltr::DelayComparison el = ltr::compare_delay_models(c.elevation.d, f);
    delay.row(r) << f, az.magnitude_ratio, az.phase_difference_deg, el.magnitude_ratio, el.phase_difference_deg;
  }
  run.write("model_delay.txt", "pade versus lag", [&](std::ostream& os) {
    ltr::write_table(os,
                     {"frequency_hz", "az_magnitude_ratio", "az_phase_difference_deg", "el_magnitude_ratio",
                      "el_phase_difference_deg"},
                     delay);
  });
  const RealMatrix dc = ltr::dc_gain(g);
  run.results = {{"plant_order", g.order()},
                 {"dc_gain", {{"az", dc(0, 0)}, {"el", dc(1, 1)}}},
                 {"uncertainty_weight_order", w.w1.order()}};
}

void identify(Run& run) {
  const ProjectConfig& c = run.config();
  const ltr::EkfRun az = ltr::estimate_parameters(c.azimuth, c.ekf);
  const ltr::EkfRun el = ltr::estimate_parameters(c.elevation, c.ekf);
  const std::size_t n = az.time.size();
  RealMatrix rows(static_cast<Eigen::Index>((n + kIdentifyStride - 1) / kIdentifyStride), 7);
  for (std::size_t k = 0; k < n; k += kIdentifyStride) {
    rows.row(static_cast<Eigen::Index>(k / kIdentifyStride)) << az.time[k], az.inertia[k], az.friction[k],
        az.covariance_trace[k], el.inertia[k], el.friction[k], el.covariance_trace[k];
  }
  run.write("identify.txt", "parameter estimates", [&](std::ostream& os) {
    ltr::write_table(os,
                     {"time", "az_inertia", "az_friction", "az_covariance_trace", "el_inertia", "el_friction",
                      "el_covariance_trace"},
                     rows);
  });
  const auto axis = [](const ltr::EkfRun& r, const ltr::GimbalAxisParams& truth) {
    return Json{{"inertia", r.final.x(4)},
                {"friction", r.final.x(5)},
                {"inertia_error", std::abs(r.final.x(4) / truth.j - 1.0)},
                {"friction_error", std::abs(r.final.x(5) / truth.bv - 1.0)},
                {"min_covariance_eigenvalue", r.min_covariance_eigenvalue},
                {"inertia_clamps", r.final.inertia_clamps}};
  };
  run.results = {{"az", axis(az, c.azimuth)}, {"el", axis(el, c.elevation)}};
}

void design(Run& run) {
  const ProjectConfig& c = run.config();
  const StateSpace g = plant(c);
  ltr::SweepOptions o;
  o.workers = c.workers;
  const ltr::LqgLtrDesign d =
      ltr::design_lqg_ltr(g, weight(c.design_weight), ltr::default_noise(2, 2, c.theta), c.rhos, o);
  const ltr::RhoDesign& selected = d.at(c.selected_rho);
  if (!selected.failure.empty()) {
    throw ltr::Error(ltr::ErrorKind::ConvergenceFailure, "selected rho design failed: " + selected.failure);
  }

  const double nan = std::nan("");
  RealMatrix table(static_cast<Eigen::Index>(d.by_rho.size()), 5);
  Json recovery = Json::array();
  for (std::size_t i = 0; i < d.by_rho.size(); ++i) {
    const ltr::RhoDesign& r = d.by_rho[i];
    const bool ok = r.failure.empty();
    table.row(static_cast<Eigen::Index>(i)) << r.rho, ok ? r.recovery_error : nan, ok && r.stable ? 1.0 : 0.0,
        ok ? r.closed_loop_max_real : nan, ok ? r.closed_loop_min_real : nan;
    Json entry = {{"rho", r.rho}, {"recovery_error", ok ? r.recovery_error : nan}, {"stable", ok && r.stable}};
    if (!ok) entry["failure"] = r.failure;
    recovery.push_back(entry);
  }
  run.write("design.txt", "lqg/ltr design", [&](std::ostream& os) {
    ltr::write_table(os, {"rho", "recovery_error", "stable", "closed_loop_max_real", "closed_loop_min_real"},
                     table);
    ltr::write_state_space(os, "compensator", selected.compensator);
    ltr::write_state_space(os, "filter_loop", d.kalman.filter_loop);
  });

  const std::vector<double> omega = ltr::log_grid(c.grid);
  std::vector<std::string> columns{"frequency_hz", "filter_sigma_max", "filter_sigma_min"};
  for (const ltr::RhoDesign& r : d.by_rho) {
    columns.push_back(label("loop_sigma_max_rho=%g", r.rho));
    columns.push_back(label("loop_sigma_min_rho=%g", r.rho));
  }
  RealMatrix loops(static_cast<Eigen::Index>(omega.size()), static_cast<Eigen::Index>(columns.size()));
  std::vector<StateSpace> gk;
  for (const ltr::RhoDesign& r : d.by_rho) {
    gk.push_back(r.failure.empty() ? ltr::connect_series(r.compensator, g) : StateSpace{});
  }
  for (std::size_t i = 0; i < omega.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const ltr::RealVector f = ltr::svd_values(ltr::evaluate_at(d.kalman.filter_loop, omega[i]));
    loops(row, 0) = omega[i] / kTwoPi;
    loops(row, 1) = f(0);
    loops(row, 2) = f(f.size() - 1);
    for (std::size_t r = 0; r < gk.size(); ++r) {
      const auto col = static_cast<Eigen::Index>(3 + 2 * r);
      if (d.by_rho[r].failure.empty()) {
        const ltr::RealVector s = ltr::svd_values(ltr::evaluate_at(gk[r], omega[i]));
        loops(row, col) = s(0);
        loops(row, col + 1) = s(s.size() - 1);
      } else {
        loops(row, col) = loops(row, col + 1) = nan;
      }
    }
  }
  run.write("design_loops.txt", "loop singular values",
            [&](std::ostream& os) { ltr::write_table(os, columns, loops); });
  run.results = {{"augmented_order", d.aug.model.order()},
                 {"compensator_order", selected.compensator.order()},
                 {"selected_rho", c.selected_rho},
                 {"selected_stable", selected.stable},
                 {"recovery", recovery}};
}

void analyze(Run& run) {
  const ProjectConfig& c = run.config();
  const StateSpace k = run.read_state_space("design.txt", "compensator");
  const StateSpace g = plant(c);
  const StateSpace w1 = ltr::uncertainty_weights().w1;
  const ltr::RobustnessReport r = ltr::analyze_robustness(g, k, weight(c.performance_weight), w1, c.grid, c.workers);
  RealMatrix rows(static_cast<Eigen::Index>(r.omega.size()), 4);
  for (std::size_t i = 0; i < r.omega.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) << r.omega[i] / kTwoPi, r.np_trace[i], r.rs_trace[i], r.rp_trace[i];
  }
  run.write("robustness.txt", "robustness tests",
            [&](std::ostream& os) { ltr::write_table(os, {"frequency_hz", "np", "rs", "rp"}, rows); });
  const ltr::DestabilizationWitness w = ltr::destabilization_witness(g, k, w1, c.grid);
  run.results = {{"nominal_performance", test_json(r.np)},
                 {"robust_stability", test_json(r.rs)},
                 {"robust_performance", test_json(r.rp)},
                 {"witness",
                  {{"frequency_hz", w.omega / kTwoPi},
                   {"delta_norm", 1.0 / w.rs_peak},
                   {"unstable_scale", w.unstable_scale},
                   {"abscissa_below", w.abscissa_below},
                   {"abscissa_above", w.abscissa_above}}}};
}

void reduce(Run& run) {
  const ProjectConfig& c = run.config();
  const StateSpace k = run.read_state_space("design.txt", "compensator");
  const ltr::Truncation t = ltr::balance_and_truncate(k, c.reduced_order);
  RealMatrix hankel(t.hankel_values.size(), 2);
  for (Eigen::Index i = 0; i < hankel.rows(); ++i) hankel.row(i) << static_cast<double>(i + 1), t.hankel_values(i);
  run.write("reduced.txt", "reduced compensator", [&](std::ostream& os) {
    ltr::write_table(os, {"index", "hankel_value"}, hankel);
    ltr::write_state_space(os, "reduced", t.reduced);
  });
  const StateSpace g = plant(c);
  const StateSpace we = weight(c.performance_weight);
  const StateSpace w1 = ltr::uncertainty_weights().w1;
  const double rp_full = ltr::analyze_robustness(g, k, we, w1, c.grid, c.workers).rp.value;
  const double rp_reduced = ltr::analyze_robustness(g, t.reduced, we, w1, c.grid, c.workers).rp.value;
  run.results = {{"full_order", k.order()},
                 {"reduced_order", t.reduced.order()},
                 {"error_bound", t.error_bound},
                 {"error", ltr::hinf_norm(ltr::subtract(k, t.reduced), {c.grid})},
                 {"rp_full", rp_full},
                 {"rp_reduced", rp_reduced}};
}

void discretize(Run& run) {
  const ProjectConfig& c = run.config();
  const StateSpace kr = run.read_state_space("reduced.txt", "reduced");
  const ltr::DiscreteStateSpace kd = ltr::bilinear_discretize(kr, c.sample_period);
  run.write("controller.txt", "discrete controller",
            [&](std::ostream& os) { ltr::write_discrete_state_space(os, "controller", kd); });
  const double radius = ltr::sampled_loop_spectral_radius(plant(c), kd);
  run.results = {{"sample_period", c.sample_period},
                 {"order", kd.a.rows()},
                 {"loop_spectral_radius", radius},
                 {"stable", radius < 1.0}};
}

ltr::DiscreteStateSpace read_controller(Run& run) {
  std::istringstream is(run.read("controller.txt"));
  return ltr::read_discrete_state_space(is, "controller");
}

void simulate(Run& run) {
  const ProjectConfig& c = run.config();
  const ltr::DiscreteStateSpace kd = read_controller(run);
  const StateSpace g = plant(c);
  const DisturbanceConfig& d = c.disturbance;
  const ltr::DisturbanceProfile profile = ltr::default_disturbance_profile(2, d.seed, d.profile);
  const ltr::SimulationTrace trace = ltr::simulate_closed_loop(g, kd, profile, d.duration);
  const std::size_t n = trace.time.size();
  const auto stride = static_cast<std::size_t>(d.trace_stride);
  RealMatrix rows(static_cast<Eigen::Index>((n + stride - 1) / stride), 9);
  for (std::size_t k = 0; k < n; k += stride) {
    const auto i = static_cast<Eigen::Index>(k);
    rows.row(static_cast<Eigen::Index>(k / stride)) << trace.time[k], trace.rate(i, 0), trace.rate(i, 1),
        trace.angle(i, 0), trace.angle(i, 1), trace.control(i, 0), trace.control(i, 1), trace.disturbance(i, 0),
        trace.disturbance(i, 1);
  }
  run.write("simulation.txt", "closed-loop simulation", [&](std::ostream& os) {
    ltr::write_table(os,
                     {"time", "az_rate", "el_rate", "az_angle", "el_angle", "az_control", "el_control",
                      "az_disturbance", "el_disturbance"},
                     rows);
  });
  const ltr::RealVector rms = ltr::rms_los_error(trace, d.settle);
  const ltr::RealVector oracle =
      ltr::rms_oracle([&](double w) { return ltr::sampled_sensitivity(g, kd, w); }, profile);
  run.results = {{"rms_urad", {{"az", rms(0)}, {"el", rms(1)}}},
                 {"oracle_urad", {{"az", oracle(0)}, {"el", oracle(1)}}},
                 {"tones_per_axis", profile.channels.front().size()}};
}

void sweep(Run& run) {
  const ProjectConfig& c = run.config();
  const ltr::DiscreteStateSpace kd = read_controller(run);
  const StateSpace kr = run.read_state_space("reduced.txt", "reduced");
  const StateSpace g = plant(c);
  const StateSpace we = weight(c.performance_weight);
  const StateSpace w1 = ltr::uncertainty_weights().w1;
  const SweepConfig& s = c.sweep;
  const std::vector<double> grid_hz = to_hz(ltr::log_grid_hz(s.f_lo_hz, s.f_hi_hz, s.points));
  ltr::SweptSineOptions o;
  o.amplitude = s.amplitude;
  o.cycles = s.cycles;
  o.workers = c.workers;

  const ltr::IdentifiedResponse id = ltr::swept_sine_identify(g, kd, grid_hz, o);
  ltr::FrequencyResponse fr;
  RealMatrix sigma(static_cast<Eigen::Index>(grid_hz.size()), 6);
  double shaped = 0.0;
  for (std::size_t i = 0; i < grid_hz.size(); ++i) {
    const double w = kTwoPi * grid_hz[i];
    fr.omega.push_back(w);
    fr.values.push_back(id.s[i]);
    const ltr::RealVector sd = ltr::svd_values(ltr::sampled_sensitivity(g, kd, w));
    const double we_gain = std::abs(ltr::evaluate_at(we, w)(0, 0));
    sigma.row(static_cast<Eigen::Index>(i)) << grid_hz[i], id.sigma[i](0), id.sigma[i](1), sd(0), sd(1),
        1.0 / we_gain;
    shaped = std::max(shaped, id.sigma[i](0) * we_gain);
  }
  run.write("sweep_response.txt", "identified sensitivity",
            [&](std::ostream& os) { ltr::write_frequency_response(os, fr); });
  run.write("sweep_sigma.txt", "identified sensitivity singular values", [&](std::ostream& os) {
    ltr::write_table(os,
                     {"frequency_hz", "sigma_1", "sigma_2", "sampled_sigma_1", "sampled_sigma_2",
                      "inverse_weight"},
                     sigma);
  });

  const ltr::RobustnessReport nominal = ltr::analyze_robustness(g, kr, we, w1, c.grid, c.workers);
  const ltr::PerturbedModelSet set = ltr::sample_perturbed_models(g, w1, s.perturbation_count, s.perturbation_seed);
  RealMatrix members(static_cast<Eigen::Index>(set.members.size()), 5);
  int unstable = 0;
  double worst = 0.0;
  for (std::size_t m = 0; m < set.members.size(); ++m) {
    const double norm = ltr::hinf_norm(set.deltas[m]);
    const double radius = ltr::sampled_loop_spectral_radius(set.members[m], kd);
    const bool stable = radius < 1.0 && ltr::closed_loop_abscissa(set.members[m], kr) < 0.0;
    double peak = std::nan("");
    if (stable) {
      const ltr::IdentifiedResponse r = ltr::swept_sine_identify(set.members[m], kd, grid_hz, o);
      peak = 0.0;
      for (std::size_t i = 0; i < grid_hz.size(); ++i) {
        peak = std::max(peak, ltr::max_singular_value(ltr::evaluate_at(we, kTwoPi * grid_hz[i]) * r.s[i]));
      }
      worst = std::max(worst, peak);
    } else {
      ++unstable;
    }
    members.row(static_cast<Eigen::Index>(m)) << static_cast<double>(m + 1), norm, stable ? 1.0 : 0.0, radius,
        peak;
  }
  run.write("perturbations.txt", "perturbed-model validation", [&](std::ostream& os) {
    ltr::write_table(os, {"member", "delta_norm", "stable", "loop_spectral_radius", "shaped_sensitivity_peak"},
                     members);
  });
  run.results = {{"points", grid_hz.size()},
                 {"nominal_shaped_peak", shaped},
                 {"members", set.members.size()},
                 {"unstable_members", unstable},
                 {"worst_member_shaped_peak", worst},
                 {"robust_performance", nominal.rp.value}};
}

using Body = void (*)(Run&);

const std::vector<std::pair<std::string, Body>>& stages() {
  static const std::vector<std::pair<std::string, Body>> s{
      {"model", model},   {"identify", identify},     {"design", design},     {"analyze", analyze},
      {"reduce", reduce}, {"discretize", discretize}, {"simulate", simulate}, {"sweep", sweep}};
  return s;
}

Json execute(const std::string& name, Body body, const ProjectConfig& config) {
  Run run(name, config);
  body(run);
  run.finish();
  return run.results;
}

void report(const ProjectConfig& config) {
  Json summary;
  summary["version"] = kVersion;
  summary["schema_version"] = kSchemaVersion;
  summary["config_hash"] = config_hash(config);
  Json results = Json::object();
  for (const auto& [name, body] : stages()) results[name] = execute(name, body, config);
  summary["results"] = results;
  summary["data"] = {{"delay_comparison", "model_delay.txt"},
                     {"parameter_estimates", "identify.txt"},
                     {"loop_recovery", "design_loops.txt"},
                     {"robustness_tests", "robustness.txt"},
                     {"identified_sensitivity", "sweep_sigma.txt"},
                     {"perturbed_models", "perturbations.txt"},
                     {"los_simulation", "simulation.txt"}};
  std::ofstream out(std::filesystem::path(config.output_dir) / "summary.json", std::ios::binary);
  out << summary.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write summary.json");
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& s : stages()) n.push_back(s.first);
    n.push_back("report");
    return n;
  }();
  return names;
}

void run_command(const std::string& name, const ProjectConfig& config) {
  if (name == "report") {
    report(config);
    return;
  }
  for (const auto& [stage, body] : stages()) {
    if (stage == name) {
      execute(stage, body, config);
      return;
    }
  }
  throw ConfigError("unknown command " + name);
}

}  // namespace cli
