#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cli {

namespace {

using nlohmann::json;

/// Strict view of a JSON object: typed getters and a final unknown-key check.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  void number(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) fail(key, "must be a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(key, "must be finite");
    }
  }

  void integer(const char* key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) fail(key, "must be an integer");
      out = v->get<int>();
    }
  }

  void seed(const char* key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) fail(key, "must be a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void text(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) fail(key, "must be a string");
      out = v->get<std::string>();
    }
  }

  void numbers(const char* key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) fail(key, "must be an array of numbers");
      out.clear();
      for (const json& e : *v) {
        if (!e.is_number()) fail(key, "must be an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }

  const json* child(const char* key) { return take(key); }
  [[nodiscard]] std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!used_.contains(item.key())) throw ConfigError("unknown key " + path_ + "." + item.key());
    }
  }

 private:
  const json* take(const char* key) {
    used_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }
  [[noreturn]] void fail(const char* key, const char* what) const {
    throw ConfigError(path_ + "." + key + " " + what);
  }

  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

void read_axis(const json& node, const std::string& path, ltr::GimbalAxisParams& p) {
  Section s(node, path);
  s.number("amplifier_gain", p.ka);
  s.number("torque_constant", p.kt);
  s.number("gyro_natural_frequency", p.wg);
  s.number("gyro_damping", p.xi);
  s.number("gyro_delay", p.d);
  s.number("inertia", p.j);
  s.number("viscous_friction", p.bv);
  s.finish();
}

json write_axis(const ltr::GimbalAxisParams& p) {
  return {{"amplifier_gain", p.ka}, {"torque_constant", p.kt}, {"gyro_natural_frequency", p.wg},
          {"gyro_damping", p.xi},   {"gyro_delay", p.d},       {"inertia", p.j},
          {"viscous_friction", p.bv}};
}

void read_weight(const json& node, const std::string& path, ltr::SensitivityWeightParams& p) {
  Section s(node, path);
  s.number("peak_sensitivity", p.ms);
  s.number("low_frequency_level", p.eps);
  s.number("damping", p.xi);
  double hz = p.wb / (2.0 * std::numbers::pi);
  s.number("bandwidth_hz", hz);
  p.wb = 2.0 * std::numbers::pi * hz;
  s.number("gain", p.gain);
  s.finish();
}

json write_weight(const ltr::SensitivityWeightParams& p) {
  return {{"peak_sensitivity", p.ms},
          {"low_frequency_level", p.eps},
          {"damping", p.xi},
          {"bandwidth_hz", p.wb / (2.0 * std::numbers::pi)},
          {"gain", p.gain}};
}

const char* delay_name(ltr::DelayModel d) {
  switch (d) {
    case ltr::DelayModel::Pade:
      return "pade";
    case ltr::DelayModel::Lag:
      return "lag";
    case ltr::DelayModel::None:
      return "none";
  }
  return "pade";
}

ltr::DelayModel delay_from(const std::string& name) {
  if (name == "pade") return ltr::DelayModel::Pade;
  if (name == "lag") return ltr::DelayModel::Lag;
  if (name == "none") return ltr::DelayModel::None;
  throw ConfigError("model.delay must be one of pade, lag, none");
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

void ProjectConfig::validate() const {
  const auto check = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  try {
    azimuth.validate();
    elevation.validate();
    design_weight.validate();
    performance_weight.validate();
  } catch (const ltr::Error& e) {
    throw ConfigError(e.what());
  }
  check(uncertainty == "measured", "model.uncertainty must be \"measured\"");
  check(theta > 0.0, "design.theta must be positive");
  check(!rhos.empty(), "design.rho must not be empty");
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    check(rhos[i] > 0.0 && (i == 0 || rhos[i] < rhos[i - 1]), "design.rho must be positive and descending");
  }
  check(std::any_of(rhos.begin(), rhos.end(),
                    [&](double r) { return std::abs(r - selected_rho) <= 1e-12 * selected_rho; }),
        "design.selected_rho must appear in design.rho");
  check(grid.f_lo_hz > 0.0 && grid.f_hi_hz > grid.f_lo_hz && grid.points_per_decade > 0,
        "grid needs 0 < f_lo_hz < f_hi_hz and points_per_decade > 0");
  check(reduced_order >= 1, "reduction.order must be >= 1");
  check(sample_period > 0.0, "discretization.sample_period must be positive");
  check(disturbance.duration > disturbance.settle && disturbance.settle >= 0.0,
        "simulation needs 0 <= settle < duration");
  check(disturbance.duration >= 100.0 * sample_period, "simulation.duration must cover 100 sample periods");
  check(disturbance.trace_stride >= 1, "simulation.trace_stride must be >= 1");
  check(!disturbance.profile.tone_freqs_hz.empty(), "simulation.tone_freqs_hz must not be empty");
  for (double f : disturbance.profile.tone_freqs_hz) check(f > 0.0, "simulation.tone_freqs_hz must be positive");
  check(disturbance.profile.noise_spacing_hz > 0.0 &&
            disturbance.profile.noise_band_hi_hz >= disturbance.profile.noise_band_lo_hz &&
            disturbance.profile.noise_band_lo_hz > 0.0 && disturbance.profile.noise_power_fraction >= 0.0,
        "simulation noise band is invalid");
  check(sweep.f_lo_hz > 0.0 && sweep.f_hi_hz > sweep.f_lo_hz && sweep.points >= 2,
        "sweep needs 0 < f_lo_hz < f_hi_hz and points >= 2");
  check(sweep.amplitude > 0.0, "sweep.amplitude must be positive");
  check(sweep.cycles - sweep.cycles / 2 >= 10, "sweep.cycles must leave at least 10 measured cycles");
  check(sweep.perturbation_count >= 0, "sweep.perturbation_count must be >= 0");
  check(ekf.duration > 0.0 && ekf.meas_dt > 0.0 && ekf.substeps >= 1 && ekf.meas_noise_std >= 0.0 &&
            ekf.init_scale > 0.0 && ekf.excitation_hz > 0.0,
        "identification settings are invalid");
  check(workers >= 1, "workers must be >= 1");
}

ProjectConfig parse_config(const std::string& text) {
  const json root = parse_json(text);
  ProjectConfig c;
  Section top(root, "config");
  int version = 0;
  top.integer("schema_version", version);
  if (version != kSchemaVersion) {
    throw ConfigError("schema_version must be " + std::to_string(kSchemaVersion));
  }
  if (const json* n = top.child("model")) {
    Section s(*n, "model");
    if (const json* az = s.child("azimuth")) read_axis(*az, s.path("azimuth"), c.azimuth);
    if (const json* el = s.child("elevation")) read_axis(*el, s.path("elevation"), c.elevation);
    std::string delay = delay_name(c.delay);
    s.text("delay", delay);
    c.delay = delay_from(delay);
    s.text("uncertainty", c.uncertainty);
    s.finish();
  }
  if (const json* n = top.child("design")) {
    Section s(*n, "design");
    if (const json* w = s.child("shaping_weight")) read_weight(*w, s.path("shaping_weight"), c.design_weight);
    if (const json* w = s.child("performance_weight")) {
      read_weight(*w, s.path("performance_weight"), c.performance_weight);
    }
    s.number("theta", c.theta);
    s.numbers("rho", c.rhos);
    s.number("selected_rho", c.selected_rho);
    s.finish();
  }
  if (const json* n = top.child("grid")) {
    Section s(*n, "grid");
    s.number("f_lo_hz", c.grid.f_lo_hz);
    s.number("f_hi_hz", c.grid.f_hi_hz);
    s.integer("points_per_decade", c.grid.points_per_decade);
    s.finish();
  }
  if (const json* n = top.child("reduction")) {
    Section s(*n, "reduction");
    s.integer("order", c.reduced_order);
    s.finish();
  }
  if (const json* n = top.child("discretization")) {
    Section s(*n, "discretization");
    s.number("sample_period", c.sample_period);
    s.finish();
  }
  if (const json* n = top.child("simulation")) {
    Section s(*n, "simulation");
    DisturbanceConfig& d = c.disturbance;
    s.seed("seed", d.seed);
    s.number("duration", d.duration);
    s.number("settle", d.settle);
    s.integer("trace_stride", d.trace_stride);
    s.numbers("tone_freqs_hz", d.profile.tone_freqs_hz);
    s.number("reference_amplitude", d.profile.reference_amplitude);
    s.number("noise_band_lo_hz", d.profile.noise_band_lo_hz);
    s.number("noise_band_hi_hz", d.profile.noise_band_hi_hz);
    s.number("noise_spacing_hz", d.profile.noise_spacing_hz);
    s.number("noise_power_fraction", d.profile.noise_power_fraction);
    s.finish();
  }
  if (const json* n = top.child("sweep")) {
    Section s(*n, "sweep");
    s.number("f_lo_hz", c.sweep.f_lo_hz);
    s.number("f_hi_hz", c.sweep.f_hi_hz);
    s.integer("points", c.sweep.points);
    s.number("amplitude", c.sweep.amplitude);
    s.integer("cycles", c.sweep.cycles);
    s.integer("perturbation_count", c.sweep.perturbation_count);
    s.seed("perturbation_seed", c.sweep.perturbation_seed);
    s.finish();
  }
  if (const json* n = top.child("identification")) {
    Section s(*n, "identification");
    s.seed("seed", c.ekf.seed);
    s.number("duration", c.ekf.duration);
    s.number("excitation_amplitude", c.ekf.excitation_amplitude);
    s.number("excitation_hz", c.ekf.excitation_hz);
    s.number("measurement_period", c.ekf.meas_dt);
    s.integer("substeps", c.ekf.substeps);
    s.number("measurement_noise_std", c.ekf.meas_noise_std);
    s.number("initial_guess_scale", c.ekf.init_scale);
    s.number("state_process_noise", c.ekf.state_process_noise);
    s.number("parameter_process_noise", c.ekf.param_process_noise);
    s.finish();
  }
  int workers = static_cast<int>(c.workers);
  top.integer("workers", workers);
  if (workers < 1) throw ConfigError("workers must be >= 1");
  c.workers = static_cast<std::size_t>(workers);
  top.text("output_dir", c.output_dir);
  top.finish();
  c.validate();
  return c;
}

ProjectConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void apply_seed(ProjectConfig& config, std::uint64_t seed) {
  config.disturbance.seed = seed;
  config.sweep.perturbation_seed = seed + 1;
  config.ekf.seed = seed + 2;
}

std::vector<double> parse_rho_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw ConfigError("bad --rho entry '" + item + "'");
    } catch (const std::logic_error&) {
      throw ConfigError("bad --rho entry '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("--rho needs at least one value");
  return out;
}

ltr::FrequencyGridSpec parse_grid(const std::string& text) {
  ltr::FrequencyGridSpec g;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d%c", &g.f_lo_hz, &g.f_hi_hz, &g.points_per_decade, &tail) != 3) {
    throw ConfigError("--grid must look like lo:hi:points_per_decade");
  }
  return g;
}

std::string canonical_json(const ProjectConfig& c) {
  const DisturbanceConfig& d = c.disturbance;
  json j = {
      {"schema_version", kSchemaVersion},
      {"model",
       {{"azimuth", write_axis(c.azimuth)},
        {"elevation", write_axis(c.elevation)},
        {"delay", delay_name(c.delay)},
        {"uncertainty", c.uncertainty}}},
      {"design",
       {{"shaping_weight", write_weight(c.design_weight)},
        {"performance_weight", write_weight(c.performance_weight)},
        {"theta", c.theta},
        {"rho", c.rhos},
        {"selected_rho", c.selected_rho}}},
      {"grid",
       {{"f_lo_hz", c.grid.f_lo_hz}, {"f_hi_hz", c.grid.f_hi_hz}, {"points_per_decade", c.grid.points_per_decade}}},
      {"reduction", {{"order", c.reduced_order}}},
      {"discretization", {{"sample_period", c.sample_period}}},
      {"simulation",
       {{"seed", d.seed},
        {"duration", d.duration},
        {"settle", d.settle},
        {"trace_stride", d.trace_stride},
        {"tone_freqs_hz", d.profile.tone_freqs_hz},
        {"reference_amplitude", d.profile.reference_amplitude},
        {"noise_band_lo_hz", d.profile.noise_band_lo_hz},
        {"noise_band_hi_hz", d.profile.noise_band_hi_hz},
        {"noise_spacing_hz", d.profile.noise_spacing_hz},
        {"noise_power_fraction", d.profile.noise_power_fraction}}},
      {"sweep",
       {{"f_lo_hz", c.sweep.f_lo_hz},
        {"f_hi_hz", c.sweep.f_hi_hz},
        {"points", c.sweep.points},
        {"amplitude", c.sweep.amplitude},
        {"cycles", c.sweep.cycles},
        {"perturbation_count", c.sweep.perturbation_count},
        {"perturbation_seed", c.sweep.perturbation_seed}}},
      {"identification",
       {{"seed", c.ekf.seed},
        {"duration", c.ekf.duration},
        {"excitation_amplitude", c.ekf.excitation_amplitude},
        {"excitation_hz", c.ekf.excitation_hz},
        {"measurement_period", c.ekf.meas_dt},
        {"substeps", c.ekf.substeps},
        {"measurement_noise_std", c.ekf.meas_noise_std},
        {"initial_guess_scale", c.ekf.init_scale},
        {"state_process_noise", c.ekf.state_process_noise},
        {"parameter_process_noise", c.ekf.param_process_noise}}},
  };
  return j.dump();
}

std::string config_hash(const ProjectConfig& config) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical_json(config)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cli
