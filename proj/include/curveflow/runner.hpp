#pragma once

// Experiment runner behind the CLI: plain-text configs (one key = value per
// line under a [command] header), initial-data presets, command execution
// and artifact emission. Runs are seed-free and deterministic; reruns of the
// same config produce byte-identical files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "curveflow/core.hpp"
#include "curveflow/diagnostics.hpp"
#include "curveflow/geometry.hpp"
#include "curveflow/io.hpp"
#include "curveflow/pde.hpp"
#include "curveflow/profiles.hpp"
#include "curveflow/travelling.hpp"

namespace curveflow {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}
}  // namespace detail

class ConfigMap {
 public:
  void insert(const std::string& key, const std::string& value) {
    if (kv_.count(key)) throw ConfigError("duplicate config key: " + key);
    kv_[key] = value;
  }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string str(const std::string& key, const std::string& fallback = "") const {
    used_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  std::string require(const std::string& key) const {
    used_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing required config key: " + key);
    return it->second;
  }

  double num(const std::string& key, double fallback) const {
    return has(key) ? parse_num(require(key), key) : (used_.insert(key), fallback);
  }
  double num(const std::string& key) const { return parse_num(require(key), key); }

  int integer(const std::string& key, int fallback) const {
    return static_cast<int>(num(key, fallback));
  }
  int integer(const std::string& key) const { return static_cast<int>(num(key)); }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    const std::string v = require(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("boolean config key '" + key + "' has value '" + v + "'");
  }

  std::vector<double> num_list(const std::string& key) const {
    std::vector<double> out;
    std::string raw = require(key);
    for (char& c : raw)
      if (c == ',') c = ' ';
    std::istringstream in(raw);
    std::string tok;
    while (in >> tok) out.push_back(parse_num(tok, key));
    if (out.empty()) throw ConfigError("config key '" + key + "' lists no values");
    return out;
  }

  void ensure_all_used() const {
    for (const auto& [key, value] : kv_) {
      (void)value;
      if (!used_.count(key)) throw ConfigError("unknown config key: " + key);
    }
  }

 private:
  static double parse_num(const std::string& v, const std::string& key) {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    try {
      std::size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' has non-numeric value '" + v + "'");
    }
  }

  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> used_;
};

struct ExperimentConfig {
  std::string command;  // flow | rescaled | profile | wave | curve | classify
  ConfigMap keys;
  std::filesystem::path base_dir;  // directory of the config file
};

inline ExperimentConfig parse_config(std::istream& in,
                                     const std::filesystem::path& base_dir = ".") {
  ExperimentConfig config;
  config.base_dir = base_dir;
  std::string line;
  bool have_section = false;
  while (std::getline(in, line)) {
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      if (have_section) throw ConfigError("config must contain exactly one [command] section");
      config.command = detail::trim(t.substr(1, t.size() - 2));
      have_section = true;
      continue;
    }
    if (!have_section) throw ConfigError("config keys must follow a [command] header");
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got: " + t);
    config.keys.insert(detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
  if (!have_section) throw ConfigError("config has no [command] section");
  static const std::set<std::string> known = {"flow", "rescaled", "profile",
                                              "wave", "curve", "classify"};
  if (!known.count(config.command)) throw ConfigError("unknown command: " + config.command);
  return config;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, path.has_parent_path() ? path.parent_path() : ".");
}

// Presets: `constant c`; `bell d` = d + cos(x/m), the symmetric class;
// `loops r` = (1 + r cos x)^{1/(1-p)}, a two-loop curvature model whose
// closure moment is m*pi*r; `file <path>` reads the core CSV format.
inline PeriodicProfile build_initial_data(const std::string& spec, double p, int m, int n,
                                          const std::filesystem::path& base_dir = ".") {
  std::istringstream in(spec);
  std::string kind;
  in >> kind;
  if (kind == "constant") {
    double c = 0.0;
    if (!(in >> c) || !(c > 0.0)) throw ConfigError("preset 'constant c' needs c > 0");
    return PeriodicProfile(m, std::vector<double>(static_cast<std::size_t>(n), c));
  }
  if (kind == "bell") {
    double d = 0.0;
    if (!(in >> d) || !(d > 1.0)) throw ConfigError("preset 'bell d' needs d > 1");
    std::vector<double> v(static_cast<std::size_t>(n));
    const double dx = grid_spacing(m, n);
    for (int i = 0; i < n; ++i)
      v[static_cast<std::size_t>(i)] = d + std::cos((-m * kPi + i * dx) / m);
    return PeriodicProfile(m, std::move(v));
  }
  if (kind == "loops") {
    double r = 0.0;
    if (!(in >> r) || !(std::fabs(r) < 1.0)) throw ConfigError("preset 'loops r' needs |r| < 1");
    if (p == 1.0) throw ConfigError("preset 'loops' is undefined at p = 1");
    std::vector<double> v(static_cast<std::size_t>(n));
    const double dx = grid_spacing(m, n);
    const double q = 1.0 / (1.0 - p);
    for (int i = 0; i < n; ++i)
      v[static_cast<std::size_t>(i)] = std::pow(1.0 + r * std::cos(-m * kPi + i * dx), q);
    return PeriodicProfile(m, std::move(v));
  }
  if (kind == "file") {
    std::string path;
    in >> path;
    if (path.empty()) throw ConfigError("preset 'file <path>' needs a path");
    PeriodicProfile prof = read_profile_csv(base_dir / path);
    if (prof.m != m || prof.size() != n)
      throw ConfigError("profile file grid does not match m/n_grid");
    return prof;
  }
  throw ConfigError("unknown initial-data preset: " + kind);
}

namespace detail {

inline int sweep_threads() {
  if (const char* env = std::getenv("CURVEFLOW_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Index-parallel map with deterministic output ordering.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const int threads = std::min<int>(sweep_threads(), static_cast<int>(count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> futures;
  futures.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    futures.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = static_cast<std::size_t>(w); i < count;
           i += static_cast<std::size_t>(threads))
        fn(i);
    }));
  }
  for (auto& f : futures) f.get();
}

inline FlowParams flow_params_from(const ConfigMap& keys) {
  FlowParams params(keys.num("p"), keys.integer("m", 1), keys.integer("n_grid", 256));
  params.cfl = keys.num("cfl", 0.4);
  params.v_cap = keys.num("v_cap", 1000.0);
  params.closure_tol = keys.num("closure_tol", 1e-7);
  params.deriv_order = keys.integer("deriv_order", 4);
  params.t_horizon = keys.num("t_horizon", std::numeric_limits<double>::infinity());
  params.max_steps = static_cast<long>(keys.num("max_steps", 2e8));
  params.validate();
  return params;
}

inline PeriodicProfile initial_data_from(const ExperimentConfig& config,
                                         const FlowParams& params, bool* projected_out) {
  PeriodicProfile v0 = build_initial_data(config.keys.require("v0"), params.p, params.m,
                                          params.n_grid, config.base_dir);
  bool projected = false;
  if (config.keys.flag("project", false)) {
    v0 = project_closure(v0, params.p, params.closure_tol).profile;
    projected = true;
  }
  if (projected_out) *projected_out = projected;
  return v0;
}

inline std::string trajectory_scalars_csv(const FlowTrajectory& traj) {
  std::vector<std::vector<double>> rows;
  rows.reserve(traj.steps.size());
  for (const auto& s : traj.steps)
    rows.push_back({s.t, s.dt, s.v_max, s.v_min, s.max_vx, s.closure_mod,
                    static_cast<double>(s.zero_count)});
  return series_csv("t,dt,v_max,v_min,max_vx,closure_mod,zero_count", rows);
}

inline void emit_snapshots(RunWriter& writer, const std::vector<Snapshot>& snaps,
                           const char* time_label) {
  std::vector<std::vector<double>> index;
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "snapshots/snap_%03zu.csv", i);
    writer.emit(name, profile_csv(snaps[i].profile));
    index.push_back({static_cast<double>(i), snaps[i].t});
  }
  writer.emit("snapshots/index.csv",
              series_csv(std::string("snap,") + time_label, index));
}

inline void run_flow(const ExperimentConfig& config, RunWriter& writer, bool /*svg*/) {
  const FlowParams params = flow_params_from(config.keys);
  bool projected = false;
  const PeriodicProfile v0 = initial_data_from(config, params, &projected);
  config.keys.ensure_all_used();

  const FlowTrajectory traj = evolve_to_blowup(v0, params);
  writer.emit("scalars.csv", trajectory_scalars_csv(traj));
  emit_snapshots(writer, traj.snapshots, "t");

  JsonValue summary = JsonValue::object();
  summary.set("p", JsonValue::num(params.p));
  summary.set("m", JsonValue::integer(params.m));
  summary.set("n_grid", JsonValue::integer(params.n_grid));
  summary.set("projected", JsonValue::boolean(projected));
  summary.set("steps", JsonValue::integer(static_cast<long long>(traj.steps.size()) - 1));
  summary.set("t_end", JsonValue::num(traj.t_end));
  summary.set("t_max_estimate", JsonValue::num(traj.t_max_estimate));
  summary.set("v_max_final", JsonValue::num(traj.steps.back().v_max));
  summary.set("stop_reason", JsonValue::str(to_string(traj.stop_reason)));
  writer.emit("summary.json", summary.dump());
}

inline void run_rescaled(const ExperimentConfig& config, RunWriter& writer, bool /*svg*/) {
  const FlowParams params = flow_params_from(config.keys);
  bool projected = false;
  const PeriodicProfile v0 = initial_data_from(config, params, &projected);
  const double tau_max = config.keys.num("tau_max", 5.0);
  const double tau_snap = config.keys.num("tau_snap", 0.5);
  const std::string t_max_key = config.keys.str("t_max", "auto");
  config.keys.ensure_all_used();

  double t_max;
  if (t_max_key == "auto")
    t_max = evolve_to_blowup(v0, params).t_max_estimate;
  else
    t_max = std::stod(t_max_key);
  if (!std::isfinite(t_max) || !(t_max > 0.0))
    throw std::runtime_error("rescaled: no usable t_max estimate");

  const RescaledTrajectory traj = evolve_rescaled(v0, params, t_max, tau_max, tau_snap);
  std::vector<std::vector<double>> rows;
  for (const auto& s : traj.steps)
    rows.push_back({s.tau, s.dt, s.u_max, s.u_min, s.max_ux_over_u});
  writer.emit("scalars.csv", series_csv("tau,dt,u_max,u_min,max_ux_over_u", rows));
  emit_snapshots(writer, traj.snapshots, "tau");

  JsonValue summary = JsonValue::object();
  summary.set("p", JsonValue::num(params.p));
  summary.set("m", JsonValue::integer(params.m));
  summary.set("n_grid", JsonValue::integer(params.n_grid));
  summary.set("t_max_used", JsonValue::num(t_max));
  summary.set("tau_end", JsonValue::num(traj.tau_end));
  summary.set("degenerate", JsonValue::boolean(traj.degenerate));
  summary.set("exploded", JsonValue::boolean(traj.exploded));
  writer.emit("summary.json", summary.dump());
}

inline void run_profile(const ExperimentConfig& config, RunWriter& writer, bool /*svg*/) {
  const double p = config.keys.num("p");
  const int n = config.keys.integer("n", 512);
  std::vector<double> a_values;
  if (config.keys.has("a")) {
    a_values = config.keys.num_list("a");
  } else {
    const double lo = config.keys.num("a_min", 0.1);
    const double hi = config.keys.num("a_max", 0.9);
    const int count = config.keys.integer("a_count", 9);
    for (int i = 0; i < count; ++i)
      a_values.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  }
  const int family_m = config.keys.integer("m", 0);
  config.keys.ensure_all_used();

  std::vector<SteadyProfile> profiles(a_values.size());
  parallel_for(a_values.size(), [&](std::size_t i) {
    profiles[i] = solve_profile(a_values[i], p, n);
  });

  std::vector<std::vector<double>> table;
  for (const auto& prof : profiles) table.push_back({prof.a, prof.b, prof.half_period});
  writer.emit("table.csv", series_csv("a,b,R", table));
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    std::string csv = "x,value\n";
    const double dxs = profiles[i].period() / static_cast<double>(profiles[i].samples.size());
    for (std::size_t j = 0; j < profiles[i].samples.size(); ++j) {
      csv += format_double(static_cast<double>(j) * dxs);
      csv += ',';
      csv += format_double(profiles[i].samples[j]);
      csv += '\n';
    }
    char name[64];
    std::snprintf(name, sizeof(name), "profiles/profile_%03zu.csv", i);
    writer.emit(name, csv);
  }

  JsonValue summary = JsonValue::object();
  summary.set("p", JsonValue::num(p));
  summary.set("n", JsonValue::integer(n));
  summary.set("count", JsonValue::integer(static_cast<long long>(a_values.size())));
  if (family_m > 0) {
    const ProfileFamily fam = find_periodic_profiles(p, family_m);
    JsonValue family = JsonValue::object();
    family.set("m", JsonValue::integer(family_m));
    family.set("continuum", JsonValue::boolean(fam.continuum));
    JsonValue members = JsonValue::array();
    for (const auto& [a, j] : fam.members) {
      JsonValue entry = JsonValue::object();
      entry.set("a", JsonValue::num(a));
      entry.set("j", JsonValue::integer(j));
      members.push(std::move(entry));
    }
    family.set("members", std::move(members));
    summary.set("family", std::move(family));
  }
  writer.emit("summary.json", summary.dump());
}

inline void run_wave(const ExperimentConfig& config, RunWriter& writer, bool /*svg*/) {
  const double p = config.keys.num("p");
  const std::vector<double> c_values = config.keys.num_list("c");
  const double eps0 = config.keys.num("eps0", 1e-6);
  const double xi_span = config.keys.num("xi_span", 200.0);
  config.keys.ensure_all_used();

  std::vector<WaveTrajectory> shots(c_values.size());
  parallel_for(c_values.size(), [&](std::size_t i) {
    shots[i] = shoot_unstable(WaveParams{p, c_values[i], eps0, xi_span});
  });

  JsonValue list = JsonValue::array();
  std::vector<std::vector<double>> u0_rows;
  for (std::size_t i = 0; i < shots.size(); ++i) {
    std::string csv = "xi,H,G,U\n";
    for (std::size_t k = 0; k < shots[i].xi.size(); ++k) {
      csv += format_double(shots[i].xi[k]);
      csv += ',';
      csv += format_double(shots[i].H[k]);
      csv += ',';
      csv += format_double(shots[i].G[k]);
      csv += ',';
      csv += format_double(std::pow(shots[i].H[k], 1.0 / p));
      csv += '\n';
    }
    char name[64];
    std::snprintf(name, sizeof(name), "waves/wave_%03zu.csv", i);
    writer.emit(name, csv);

    JsonValue entry = JsonValue::object();
    entry.set("c", JsonValue::num(c_values[i]));
    entry.set("h_c", JsonValue::num(shots[i].h_c));
    entry.set("U0", JsonValue::num(shots[i].U0));
    entry.set("lambda_c", JsonValue::num(shots[i].lambda_c));
    list.push(std::move(entry));
    u0_rows.push_back({c_values[i], shots[i].U0});
  }
  writer.emit("u0.csv", series_csv("c,U0", u0_rows));

  JsonValue summary = JsonValue::object();
  summary.set("p", JsonValue::num(p));
  summary.set("eps0", JsonValue::num(eps0));
  summary.set("shots", std::move(list));
  writer.emit("summary.json", summary.dump());
}

inline void run_curve(const ExperimentConfig& config, RunWriter& writer, bool svg) {
  const std::string kind = config.keys.str("kind", "profile");
  PlaneCurve curve;
  JsonValue summary = JsonValue::object();
  if (kind == "soliton") {
    const double alpha = config.keys.num("alpha");
    const double eps = config.keys.num("eps", 1e-3);
    const int n = config.keys.integer("n", 2048);
    config.keys.ensure_all_used();
    curve = soliton_curve(alpha, eps, n);
    summary.set("alpha", JsonValue::num(alpha));
    summary.set("kind", JsonValue::str("soliton"));
  } else if (kind == "profile") {
    const double p = config.keys.num("p");
    const int m = config.keys.integer("m", 1);
    const int n = config.keys.integer("n_grid", 512);
    const double alpha = config.keys.num("alpha", p > 1.0 ? 1.0 / (p - 1.0) : 1.0);
    PeriodicProfile v0 = build_initial_data(config.keys.require("v0"), p, m, n, config.base_dir);
    if (config.keys.flag("project", false))
      v0 = project_closure(v0, p, config.keys.num("closure_tol", 1e-7)).profile;
    config.keys.ensure_all_used();
    curve = reconstruct_curve(curvature_from_v(v0, alpha));
    summary.set("kind", JsonValue::str("reconstruction"));
    summary.set("closed_gap", JsonValue::num(curve.closed_gap));
    summary.set("rotation_index", JsonValue::integer(curve.rotation_index));
  } else {
    throw ConfigError("curve: kind must be 'soliton' or 'profile'");
  }

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < curve.points.size(); ++i)
    rows.push_back({curve.points[i][0], curve.points[i][1], curve.tangent_angles[i]});
  writer.emit("curve.csv", series_csv("x,y,theta", rows));
  if (svg) writer.emit("curve.svg", curve_svg(curve.points));
  summary.set("points", JsonValue::integer(static_cast<long long>(curve.points.size())));
  writer.emit("summary.json", summary.dump());
}

inline void run_classify(const ExperimentConfig& config, RunWriter& writer, bool /*svg*/) {
  const FlowParams params = flow_params_from(config.keys);
  bool projected = false;
  const PeriodicProfile v0 = initial_data_from(config, params, &projected);
  config.keys.ensure_all_used();

  const FlowTrajectory traj = evolve_to_blowup(v0, params);
  writer.emit("scalars.csv", trajectory_scalars_csv(traj));

  const BlowupReport report = classify_blowup(traj);
  std::vector<std::vector<double>> ratio;
  const std::size_t stride = std::max<std::size_t>(1, report.ratio_series.size() / 4096);
  for (std::size_t i = 0; i < report.ratio_series.size(); i += stride)
    ratio.push_back({report.ratio_series[i].first, report.ratio_series[i].second});
  writer.emit("ratio.csv", series_csv("t,Q", ratio));

  const RateProbe probe = rate_probe(traj, params.p);

  JsonValue rep = JsonValue::object();
  rep.set("kind", JsonValue::str(to_string(report.kind)));
  rep.set("growth_factor", JsonValue::num(report.growth_factor));
  rep.set("c_bound", JsonValue::num(report.c_bound));
  JsonValue window = JsonValue::array();
  window.push(JsonValue::num(report.window_t_lo));
  window.push(JsonValue::num(report.window_t_hi));
  rep.set("window", std::move(window));
  rep.set("t_max_estimate", JsonValue::num(report.t_max_estimate));
  rep.set("rate_probe_slope", JsonValue::num(probe.slope));
  rep.set("rate_probe_ok", JsonValue::boolean(probe.ok));
  rep.set("note", JsonValue::str("thresholded classifier; the band between growth factors "
                                 "1.5 and 3 is reported as inconclusive"));
  writer.emit("report.json", rep.dump());

  if (is_symmetric_decreasing(traj.snapshots.front().profile)) {
    std::vector<std::vector<double>> cos_rows, probe_rows, moment_rows;
    for (const auto& [t, err] : cosine_convergence_error(traj)) cos_rows.push_back({t, err});
    for (const auto& [t, val] : probe_series(traj, 2.0)) probe_rows.push_back({t, val});
    const MomentCheck mc = monotone_moment_check(traj);
    for (const auto& [t, d] : mc.series) moment_rows.push_back({t, d});
    writer.emit("cos_error.csv", series_csv("t,sup_error", cos_rows));
    writer.emit("probe.csv", series_csv("t,v_probe", probe_rows));
    writer.emit("moment.csv", series_csv("t,D", moment_rows));
  }

  JsonValue summary = JsonValue::object();
  summary.set("p", JsonValue::num(params.p));
  summary.set("m", JsonValue::integer(params.m));
  summary.set("n_grid", JsonValue::integer(params.n_grid));
  summary.set("projected", JsonValue::boolean(projected));
  summary.set("t_end", JsonValue::num(traj.t_end));
  summary.set("t_max_estimate", JsonValue::num(traj.t_max_estimate));
  summary.set("stop_reason", JsonValue::str(to_string(traj.stop_reason)));
  writer.emit("summary.json", summary.dump());
}

}  // namespace detail

struct RunOutcome {
  int exit_code = 0;
  std::string error;  // machine-readable JSON when exit_code != 0
};

// Execute a parsed experiment; artifacts land in out_dir with a manifest.
inline RunOutcome run_experiment(const ExperimentConfig& config,
                                 const std::filesystem::path& out_dir, bool svg = false) {
  RunOutcome outcome;
  try {
    RunWriter writer(out_dir);
    if (config.command == "flow")
      detail::run_flow(config, writer, svg);
    else if (config.command == "rescaled")
      detail::run_rescaled(config, writer, svg);
    else if (config.command == "profile")
      detail::run_profile(config, writer, svg);
    else if (config.command == "wave")
      detail::run_wave(config, writer, svg);
    else if (config.command == "curve")
      detail::run_curve(config, writer, svg);
    else if (config.command == "classify")
      detail::run_classify(config, writer, svg);
    else
      throw ConfigError("unknown command: " + config.command);
    writer.write_manifest();
  } catch (const ConfigError& err) {
    JsonValue msg = JsonValue::object();
    msg.set("error", JsonValue::str(err.what()));
    msg.set("kind", JsonValue::str("config"));
    outcome.exit_code = 2;
    outcome.error = msg.dump();
  } catch (const std::exception& err) {
    JsonValue msg = JsonValue::object();
    msg.set("error", JsonValue::str(err.what()));
    msg.set("kind", JsonValue::str("numerical"));
    outcome.exit_code = 3;
    outcome.error = msg.dump();
  }
  return outcome;
}

}  // namespace curveflow
