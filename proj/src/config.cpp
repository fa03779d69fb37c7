#include "lhv/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "lhv/errors.hpp"

namespace lhv {

namespace {

struct ExperimentRow {
  Experiment e;
  const char* name;
  std::uint64_t stream_id;
};

constexpr ExperimentRow kExperiments[] = {
    {Experiment::bell_test, "bell-test", 1},
    {Experiment::loophole_sweep, "loophole-sweep", 2},
    {Experiment::histogram, "histogram", 3},
    {Experiment::curve, "curve", 4},
    {Experiment::scatter, "scatter", 5},
    {Experiment::singles, "singles", 6},
    {Experiment::tomography, "tomography", 7},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
    throw ConfigError("config: " + key + ": not a finite number: '" + value + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  if (!value.empty() && value[0] == '-')
    throw ConfigError("config: " + key + ": must be non-negative: '" + value + "'");
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE)
    throw ConfigError("config: " + key + ": not an unsigned integer: '" + value + "'");
  return v;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

PhaseMode parse_phase_mode(const std::string& key, const std::string& value) {
  if (value == "two_class") return PhaseMode::two_class;
  if (value == "uniform") return PhaseMode::uniform;
  throw ConfigError("config: " + key + ": expected two_class or uniform, got '" + value + "'");
}

SettingMode parse_setting_mode(const std::string& key, const std::string& value) {
  if (value == "phase") return SettingMode::phase;
  if (value == "path") return SettingMode::path;
  throw ConfigError("config: " + key + ": expected phase or path, got '" + value + "'");
}

DiscriminatorMode parse_disc_mode(const std::string& key, const std::string& value) {
  if (value == "difference") return DiscriminatorMode::difference;
  if (value == "per_channel") return DiscriminatorMode::per_channel;
  throw ConfigError("config: " + key + ": expected difference or per_channel, got '" + value + "'");
}

bool apply_arm_key(ArmSettings& arm, const std::string& key,
                   const std::string& field, const std::string& value) {
  if (field == "mode") arm.mode = parse_setting_mode(key, value);
  else if (field == "theta") arm.theta_setting = parse_double(key, value);
  else if (field == "path_delta") arm.path_delta = parse_double(key, value);
  else if (field == "path_windings") arm.path_windings = static_cast<std::size_t>(parse_u64(key, value));
  else if (field == "lo_amplitude") arm.lo_amplitude = parse_double(key, value);
  else if (field == "gain") arm.gain = parse_double(key, value);
  else if (field == "noise_sigma") arm.noise_sigma = parse_double(key, value);
  else if (field == "discriminator_threshold") arm.discriminator_threshold = parse_double(key, value);
  else if (field == "discriminator_mode") arm.discriminator_mode = parse_disc_mode(key, value);
  else return false;
  return true;
}

// The sweepable numeric parameters. "discriminator_threshold" and
// "noise_sigma" without an arm prefix set both arms together.
const std::vector<std::pair<std::string, std::function<void(RunConfig&, double)>>>&
sweep_registry() {
  static const std::vector<std::pair<std::string, std::function<void(RunConfig&, double)>>> reg = {
      {"discriminator_threshold",
       [](RunConfig& c, double v) {
         c.arm_a.discriminator_threshold = v;
         c.arm_b.discriminator_threshold = v;
       }},
      {"arm_a.discriminator_threshold",
       [](RunConfig& c, double v) { c.arm_a.discriminator_threshold = v; }},
      {"arm_b.discriminator_threshold",
       [](RunConfig& c, double v) { c.arm_b.discriminator_threshold = v; }},
      {"noise_sigma",
       [](RunConfig& c, double v) {
         c.arm_a.noise_sigma = v;
         c.arm_b.noise_sigma = v;
       }},
      {"arm_a.noise_sigma", [](RunConfig& c, double v) { c.arm_a.noise_sigma = v; }},
      {"arm_b.noise_sigma", [](RunConfig& c, double v) { c.arm_b.noise_sigma = v; }},
      {"source.p_alpha_zero", [](RunConfig& c, double v) { c.source.p_alpha_zero = v; }},
      {"source.delta_omega_sigma",
       [](RunConfig& c, double v) { c.source.delta_omega_sigma = v; }},
      {"source.amplitude_sigma",
       [](RunConfig& c, double v) { c.source.amplitude_sigma = v; }},
      {"source.amplitude_correlation",
       [](RunConfig& c, double v) { c.source.amplitude_correlation = v; }},
      {"source.tap_ratio", [](RunConfig& c, double v) { c.source.tap_ratio = v; }},
      {"source.pd_threshold", [](RunConfig& c, double v) { c.source.pd_threshold = v; }},
  };
  return reg;
}

}  // namespace

const char* experiment_name(Experiment e) noexcept {
  for (const auto& row : kExperiments)
    if (row.e == e) return row.name;
  return "?";
}

Experiment parse_experiment(const std::string& name) {
  for (const auto& row : kExperiments)
    if (name == row.name) return row.e;
  throw ConfigError("config: unknown experiment '" + name + "'");
}

std::uint64_t experiment_stream_id(Experiment e) noexcept {
  for (const auto& row : kExperiments)
    if (row.e == e) return row.stream_id;
  return 0;
}

bool sweep_parameter_known(const std::string& name) {
  for (const auto& [key, fn] : sweep_registry())
    if (key == name) return true;
  return false;
}

void apply_sweep_value(RunConfig& cfg, const std::string& name, double value) {
  for (const auto& [key, fn] : sweep_registry()) {
    if (key == name) {
      fn(cfg, value);
      return;
    }
  }
  throw ConfigError("config: sweep.parameter '" + name + "' is not a sweepable field");
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "experiment") { cfg.experiment = parse_experiment(value); return; }
  if (key == "seed") { cfg.seed = parse_u64(key, value); return; }
  if (key == "trials") { cfg.trials = parse_u64(key, value); return; }
  if (key == "workers") { cfg.workers = static_cast<std::size_t>(parse_u64(key, value)); return; }
  if (key == "out_path") { cfg.out_path = value; return; }

  const auto dot = key.find('.');
  const std::string section = dot == std::string::npos ? key : key.substr(0, dot);
  const std::string field = dot == std::string::npos ? "" : key.substr(dot + 1);

  if (section == "source") {
    auto& s = cfg.source;
    if (field == "p_alpha_zero") s.p_alpha_zero = parse_double(key, value);
    else if (field == "omega_mean") s.omega_mean = parse_double(key, value);
    else if (field == "omega_sigma") s.omega_sigma = parse_double(key, value);
    else if (field == "delta_omega_sigma") s.delta_omega_sigma = parse_double(key, value);
    else if (field == "amplitude_mean") s.amplitude_mean = parse_double(key, value);
    else if (field == "amplitude_sigma") s.amplitude_sigma = parse_double(key, value);
    else if (field == "amplitude_correlation") s.amplitude_correlation = parse_double(key, value);
    else if (field == "tap_ratio") s.tap_ratio = parse_double(key, value);
    else if (field == "pd_threshold") s.pd_threshold = parse_double(key, value);
    else if (field == "phase_mode") s.phase_mode = parse_phase_mode(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
    return;
  }
  if (section == "arm_a" && apply_arm_key(cfg.arm_a, key, field, value)) {
    if (field == "noise_sigma") cfg.arm_a_noise_explicit = true;
    return;
  }
  if (section == "arm_b" && apply_arm_key(cfg.arm_b, key, field, value)) return;
  if (section == "settings") {
    if (field == "a") cfg.settings.a = parse_double(key, value);
    else if (field == "a_prime") cfg.settings.a_prime = parse_double(key, value);
    else if (field == "b") cfg.settings.b = parse_double(key, value);
    else if (field == "b_prime") cfg.settings.b_prime = parse_double(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
    cfg.settings_explicit = true;
    return;
  }
  if (section == "histogram") {
    if (field == "bins") { cfg.histogram_bins = static_cast<std::size_t>(parse_u64(key, value)); return; }
    throw ConfigError("config: unknown key '" + key + "'");
  }
  if (section == "curve") {
    if (field == "points") cfg.curve_points = static_cast<std::size_t>(parse_u64(key, value));
    else if (field == "theta_a") cfg.curve_theta_a = parse_double(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
    return;
  }
  if (section == "singles") {
    if (field == "points") { cfg.singles_points = static_cast<std::size_t>(parse_u64(key, value)); return; }
    throw ConfigError("config: unknown key '" + key + "'");
  }
  if (section == "scatter") {
    if (field == "mode") {
      if (value == "random") cfg.scatter_mode = ScatterMode::random;
      else if (value == "ramp") cfg.scatter_mode = ScatterMode::ramp;
      else throw ConfigError("config: " + key + ": expected random or ramp, got '" + value + "'");
      return;
    }
    throw ConfigError("config: unknown key '" + key + "'");
  }
  if (section == "sweep") {
    if (!cfg.sweep) cfg.sweep.emplace();
    if (field == "parameter") cfg.sweep->parameter = value;
    else if (field == "start") cfg.sweep->start = parse_double(key, value);
    else if (field == "stop") cfg.sweep->stop = parse_double(key, value);
    else if (field == "steps") cfg.sweep->steps = static_cast<std::size_t>(parse_u64(key, value));
    else throw ConfigError("config: unknown key '" + key + "'");
    return;
  }
  if (section == "tomography") {
    if (field == "nx") cfg.grid.nx = static_cast<std::size_t>(parse_u64(key, value));
    else if (field == "np") cfg.grid.np = static_cast<std::size_t>(parse_u64(key, value));
    else if (field == "x_range") cfg.grid.x_range = parse_double(key, value);
    else if (field == "p_range") cfg.grid.p_range = parse_double(key, value);
    else if (field == "phase_bins") cfg.grid.phase_bins = static_cast<std::size_t>(parse_u64(key, value));
    else if (field == "quadrature_bins") cfg.grid.quadrature_bins = static_cast<std::size_t>(parse_u64(key, value));
    else if (field == "filter_cutoff") cfg.filter_cutoff = parse_double(key, value);
    else if (field == "normalization") cfg.normalization = parse_double(key, value);
    else if (field == "calibration_samples") cfg.calibration_samples = parse_u64(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
    return;
  }
  throw ConfigError("config: unknown key '" + key + "'");
}

namespace {

RunConfig load_from_manifest(const std::string& path, std::ifstream& in) {
  RunConfig cfg;
  std::string line;
  bool found = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded())
      throw ConfigError("config: " + path + ": malformed manifest line");
    if (rec.value("record", "") != "run") continue;
    if (!rec.contains("config") || !rec["config"].is_object())
      throw ConfigError("config: " + path + ": run record has no config object");
    for (const auto& [k, v] : rec["config"].items())
      apply_key(cfg, k, v.is_string() ? v.get<std::string>() : v.dump());
    found = true;
  }
  if (!found)
    throw ConfigError("config: " + path + ": no run record in manifest");
  return cfg;
}

}  // namespace

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");

  // Sniff: a manifest starts with a JSON object.
  int c = in.peek();
  while (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
    in.get();
    c = in.peek();
  }
  if (c == '{') return load_from_manifest(path, in);

  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: " + path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: " + path + ":" + std::to_string(lineno) + ": empty key");
    apply_key(cfg, key, value);
  }
  return cfg;
}

void finalize(RunConfig& cfg) {
  if (cfg.experiment == Experiment::loophole_sweep) {
    if (!cfg.settings_explicit) {
      cfg.settings = ChshSettings{0.375 * std::numbers::pi, -0.125 * std::numbers::pi,
                                  0.125 * std::numbers::pi, -0.375 * std::numbers::pi};
      cfg.settings_explicit = true;
    }
    if (!cfg.sweep) {
      cfg.sweep.emplace();
      cfg.sweep->parameter = "discriminator_threshold";
      cfg.sweep->start = 0.0;
      cfg.sweep->stop = 0.95 * expected_x_max(cfg.source, cfg.arm_a);
      cfg.sweep->steps = 20;
    }
  }
  if (cfg.experiment == Experiment::tomography && !cfg.arm_a_noise_explicit) {
    cfg.arm_a.noise_sigma = 0.15 * expected_x_max(cfg.source, cfg.arm_a);
    cfg.arm_a_noise_explicit = true;
  }
}

void RunConfig::validate() const {
  if (trials < 1) throw ConfigError("config: trials must be >= 1");
  if (workers < 1) throw ConfigError("config: workers must be >= 1");
  if (out_path.empty()) throw ConfigError("config: out_path must not be empty");
  source.validate();
  arm_a.validate();
  arm_b.validate();
  for (double v : {settings.a, settings.a_prime, settings.b, settings.b_prime})
    if (!std::isfinite(v)) throw ConfigError("config: settings angles must be finite");
  if (!std::isfinite(curve_theta_a))
    throw ConfigError("config: curve.theta_a must be finite");
  if (histogram_bins < 1) throw ConfigError("config: histogram.bins must be >= 1");
  if (curve_points < 2) throw ConfigError("config: curve.points must be >= 2");
  if (singles_points < 2) throw ConfigError("config: singles.points must be >= 2");
  if (sweep) {
    if (sweep->steps < 1) throw ConfigError("config: sweep.steps must be >= 1");
    if (!std::isfinite(sweep->start) || !std::isfinite(sweep->stop))
      throw ConfigError("config: sweep range must be finite");
    if (!sweep_parameter_known(sweep->parameter))
      throw ConfigError("config: sweep.parameter '" + sweep->parameter +
                        "' is not a sweepable field");
  }
  if (!(filter_cutoff > 0.0 && filter_cutoff <= 1.0))
    throw ConfigError("config: tomography.filter_cutoff must be in (0, 1]");
  if (!(normalization > 0.0))
    throw ConfigError("config: tomography.normalization must be > 0");
  if (grid.nx < 2 || grid.np < 2)
    throw ConfigError("config: tomography grid must be at least 2x2");
  if (grid.phase_bins < 1 || grid.quadrature_bins < 8)
    throw ConfigError("config: tomography binning too coarse");
  if (!(grid.x_range > 0.0 && grid.p_range > 0.0))
    throw ConfigError("config: tomography ranges must be > 0");
}

namespace {

void emit_arm(std::map<std::string, std::string>& m, const std::string& prefix,
              const ArmSettings& a) {
  m[prefix + ".mode"] = a.mode == SettingMode::phase ? "phase" : "path";
  m[prefix + ".theta"] = fmt_double(a.theta_setting);
  m[prefix + ".path_delta"] = fmt_double(a.path_delta);
  m[prefix + ".path_windings"] = std::to_string(a.path_windings);
  m[prefix + ".lo_amplitude"] = fmt_double(a.lo_amplitude);
  m[prefix + ".gain"] = fmt_double(a.gain);
  m[prefix + ".noise_sigma"] = fmt_double(a.noise_sigma);
  m[prefix + ".discriminator_threshold"] = fmt_double(a.discriminator_threshold);
  m[prefix + ".discriminator_mode"] =
      a.discriminator_mode == DiscriminatorMode::difference ? "difference" : "per_channel";
}

}  // namespace

std::map<std::string, std::string> to_flat_map(const RunConfig& cfg) {
  std::map<std::string, std::string> m;
  m["experiment"] = experiment_name(cfg.experiment);
  m["seed"] = std::to_string(cfg.seed);
  m["trials"] = std::to_string(cfg.trials);
  m["workers"] = std::to_string(cfg.workers);
  m["out_path"] = cfg.out_path;

  m["source.p_alpha_zero"] = fmt_double(cfg.source.p_alpha_zero);
  m["source.omega_mean"] = fmt_double(cfg.source.omega_mean);
  m["source.omega_sigma"] = fmt_double(cfg.source.omega_sigma);
  m["source.delta_omega_sigma"] = fmt_double(cfg.source.delta_omega_sigma);
  m["source.amplitude_mean"] = fmt_double(cfg.source.amplitude_mean);
  m["source.amplitude_sigma"] = fmt_double(cfg.source.amplitude_sigma);
  m["source.amplitude_correlation"] = fmt_double(cfg.source.amplitude_correlation);
  m["source.tap_ratio"] = fmt_double(cfg.source.tap_ratio);
  m["source.pd_threshold"] = fmt_double(cfg.source.pd_threshold);
  m["source.phase_mode"] =
      cfg.source.phase_mode == PhaseMode::two_class ? "two_class" : "uniform";

  emit_arm(m, "arm_a", cfg.arm_a);
  emit_arm(m, "arm_b", cfg.arm_b);

  m["settings.a"] = fmt_double(cfg.settings.a);
  m["settings.a_prime"] = fmt_double(cfg.settings.a_prime);
  m["settings.b"] = fmt_double(cfg.settings.b);
  m["settings.b_prime"] = fmt_double(cfg.settings.b_prime);

  m["histogram.bins"] = std::to_string(cfg.histogram_bins);
  m["curve.points"] = std::to_string(cfg.curve_points);
  m["curve.theta_a"] = fmt_double(cfg.curve_theta_a);
  m["singles.points"] = std::to_string(cfg.singles_points);
  m["scatter.mode"] = cfg.scatter_mode == ScatterMode::random ? "random" : "ramp";

  if (cfg.sweep) {
    m["sweep.parameter"] = cfg.sweep->parameter;
    m["sweep.start"] = fmt_double(cfg.sweep->start);
    m["sweep.stop"] = fmt_double(cfg.sweep->stop);
    m["sweep.steps"] = std::to_string(cfg.sweep->steps);
  }

  m["tomography.nx"] = std::to_string(cfg.grid.nx);
  m["tomography.np"] = std::to_string(cfg.grid.np);
  m["tomography.x_range"] = fmt_double(cfg.grid.x_range);
  m["tomography.p_range"] = fmt_double(cfg.grid.p_range);
  m["tomography.phase_bins"] = std::to_string(cfg.grid.phase_bins);
  m["tomography.quadrature_bins"] = std::to_string(cfg.grid.quadrature_bins);
  m["tomography.filter_cutoff"] = fmt_double(cfg.filter_cutoff);
  m["tomography.normalization"] = fmt_double(cfg.normalization);
  m["tomography.calibration_samples"] = std::to_string(cfg.calibration_samples);
  return m;
}

}  // namespace lhv
