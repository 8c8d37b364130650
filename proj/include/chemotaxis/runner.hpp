#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "chemotaxis/diagnostics.hpp"
#include "chemotaxis/error.hpp"
#include "chemotaxis/grid.hpp"
#include "chemotaxis/integrator.hpp"
#include "chemotaxis/params.hpp"
#include "chemotaxis/rng.hpp"
#include "chemotaxis/state.hpp"

namespace chemotaxis {

enum class GridMode {
  exact_domain,   // nx, ny, lx, ly given; spacing derived
  exact_spacing,  // nx, ny, dx, dy given; domain derived
};

struct GridSpec {
  GridMode mode = GridMode::exact_domain;
  int nx = 13;
  int ny = 13;
  double lx = 2.0 * std::numbers::pi;
  double ly = 2.0 * std::numbers::pi;
  double dx = 0.5;  // exact_spacing only
  double dy = 0.5;

  Grid make() const {
    return mode == GridMode::exact_domain ? make_grid(nx, ny, lx, ly) : make_grid_with_spacing(nx, ny, dx, dy);
  }
};

struct InitialData {
  double u0 = 2.5;
  double v0 = 2.5;
  double w0 = 5.0;
  double sigma = 0.2;
};

struct RunConfig {
  Params params;
  GridSpec grid;
  double dt = 0.01;
  double t_end = 1000.0;
  double floor = default_floor;
  std::uint64_t seed = 42;
  InitialData ic;
  std::vector<double> snapshot_times{10, 20, 60, 1000};
  double diag_interval = 1.0;
  bool upwind = false;
  std::string out_dir = "runs/case1";
  std::optional<std::pair<double, double>> fit_window;  // default [t_end/2, 0.9 t_end]

  StepConfig step_config() const { return {dt, floor, upwind ? FaceRule::upwind : FaceRule::centered}; }
  std::pair<double, double> effective_fit_window() const {
    return fit_window.value_or(std::pair{0.5 * t_end, 0.9 * t_end});
  }
};

/// k = 0.8, mu1 = 0.8, mu2 = 0.9, r = 0.1; base state (2.5, 2.5, 5).
inline RunConfig case1_preset() { return RunConfig{}; }

/// Same as case 1 with k = 1, run to t = 1600.
inline RunConfig case2_preset() {
  RunConfig c;
  c.params.k = 1.0;
  c.t_end = 1600.0;
  c.snapshot_times = {10, 20, 60, 1600};
  c.out_dir = "runs/case2";
  return c;
}

// ---------------------------------------------------------------------------
// Configuration file: one `key = value` per line, `#` starts a comment.
// Keys are listed in config_keys(); anything else is rejected.
// ---------------------------------------------------------------------------

using KeyValues = std::vector<std::pair<std::string, std::string>>;

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "chi1", "chi2", "mu1", "mu2",   "r",     "k",    "grid_mode", "nx",
      "ny",   "lx",   "ly",  "dx",    "dy",    "dt",   "t_end",     "floor",
      "seed", "u0",   "v0",  "w0",    "sigma", "snapshot_times", "diag_interval", "upwind",
      "out_dir", "fit_window"};
  return keys;
}

/// Shortest decimal that reads back to the same double.
inline std::string format_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline KeyValues to_key_values(const RunConfig& c) {
  auto d = format_shortest;
  std::string snaps;
  for (std::size_t n = 0; n < c.snapshot_times.size(); ++n) snaps += (n ? "," : "") + d(c.snapshot_times[n]);
  std::string fit = c.fit_window ? d(c.fit_window->first) + "," + d(c.fit_window->second) : "auto";
  return {{"chi1", d(c.params.chi1)},
          {"chi2", d(c.params.chi2)},
          {"mu1", d(c.params.mu1)},
          {"mu2", d(c.params.mu2)},
          {"r", d(c.params.r)},
          {"k", d(c.params.k)},
          {"grid_mode", c.grid.mode == GridMode::exact_domain ? "exact-domain" : "exact-spacing"},
          {"nx", std::to_string(c.grid.nx)},
          {"ny", std::to_string(c.grid.ny)},
          {"lx", d(c.grid.lx)},
          {"ly", d(c.grid.ly)},
          {"dx", d(c.grid.dx)},
          {"dy", d(c.grid.dy)},
          {"dt", d(c.dt)},
          {"t_end", d(c.t_end)},
          {"floor", d(c.floor)},
          {"seed", std::to_string(c.seed)},
          {"u0", d(c.ic.u0)},
          {"v0", d(c.ic.v0)},
          {"w0", d(c.ic.w0)},
          {"sigma", d(c.ic.sigma)},
          {"snapshot_times", snaps},
          {"diag_interval", d(c.diag_interval)},
          {"upwind", c.upwind ? "true" : "false"},
          {"out_dir", c.out_dir},
          {"fit_window", fit}};
}

inline std::string to_config_text(const RunConfig& c) {
  std::string out;
  for (const auto& [k, v] : to_key_values(c)) out += k + " = " + v + "\n";
  return out;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] inline void bad_value(const std::string& key, const std::string& value) {
  fail(ErrorKind::schema_violation, "invalid value for '" + key + "': '" + value + "'");
}

inline double parse_real(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    bad_value(key, value);
  }
  if (pos != value.size() || !std::isfinite(v)) bad_value(key, value);
  return v;
}

inline long long parse_int(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &pos);
  } catch (const std::exception&) {
    bad_value(key, value);
  }
  if (pos != value.size()) bad_value(key, value);
  return v;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(key, trim(item)));
  return out;
}

/// Number of dt steps to reach t, or nullopt when t is not on the step lattice.
inline std::optional<long> steps_for(double t, double dt) {
  const double q = t / dt;
  const long n = std::lround(q);
  if (std::abs(n * dt - t) > 1e-9 * std::max(1.0, std::abs(t))) return std::nullopt;
  return n;
}

}  // namespace detail

/// Applies `kv` on top of `base`. Unknown keys, duplicates and malformed
/// values raise ErrorKind::schema_violation.
inline RunConfig apply_key_values(RunConfig c, const KeyValues& kv) {
  using namespace detail;
  const auto& known = config_keys();
  std::map<std::string, int> seen;
  for (const auto& [key, value] : kv) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      fail(ErrorKind::schema_violation, "unknown configuration key '" + key + "'");
    if (seen[key]++) fail(ErrorKind::schema_violation, "duplicate configuration key '" + key + "'");

    if (key == "chi1") c.params.chi1 = parse_real(key, value);
    else if (key == "chi2") c.params.chi2 = parse_real(key, value);
    else if (key == "mu1") c.params.mu1 = parse_real(key, value);
    else if (key == "mu2") c.params.mu2 = parse_real(key, value);
    else if (key == "r") c.params.r = parse_real(key, value);
    else if (key == "k") c.params.k = parse_real(key, value);
    else if (key == "grid_mode") {
      if (value == "exact-domain") c.grid.mode = GridMode::exact_domain;
      else if (value == "exact-spacing") c.grid.mode = GridMode::exact_spacing;
      else bad_value(key, value);
    } else if (key == "nx") c.grid.nx = static_cast<int>(parse_int(key, value));
    else if (key == "ny") c.grid.ny = static_cast<int>(parse_int(key, value));
    else if (key == "lx") c.grid.lx = parse_real(key, value);
    else if (key == "ly") c.grid.ly = parse_real(key, value);
    else if (key == "dx") c.grid.dx = parse_real(key, value);
    else if (key == "dy") c.grid.dy = parse_real(key, value);
    else if (key == "dt") c.dt = parse_real(key, value);
    else if (key == "t_end") c.t_end = parse_real(key, value);
    else if (key == "floor") c.floor = parse_real(key, value);
    else if (key == "seed") {
      if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) bad_value(key, value);
      try {
        c.seed = std::stoull(value);
      } catch (const std::exception&) {
        bad_value(key, value);
      }
    } else if (key == "u0") c.ic.u0 = parse_real(key, value);
    else if (key == "v0") c.ic.v0 = parse_real(key, value);
    else if (key == "w0") c.ic.w0 = parse_real(key, value);
    else if (key == "sigma") c.ic.sigma = parse_real(key, value);
    else if (key == "snapshot_times") c.snapshot_times = value.empty() ? std::vector<double>{} : parse_list(key, value);
    else if (key == "diag_interval") c.diag_interval = parse_real(key, value);
    else if (key == "upwind") {
      if (value == "true") c.upwind = true;
      else if (value == "false") c.upwind = false;
      else bad_value(key, value);
    } else if (key == "out_dir") c.out_dir = value;
    else if (key == "fit_window") {
      if (value == "auto") {
        c.fit_window.reset();
      } else {
        const auto w = parse_list(key, value);
        if (w.size() != 2) bad_value(key, value);
        c.fit_window = std::pair{w[0], w[1]};
      }
    }
  }
  return c;
}

inline KeyValues parse_config_text(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::schema_violation, "line " + std::to_string(lineno) + ": expected 'key = value'");
    kv.emplace_back(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return kv;
}

/// Keys missing from the file keep their case-1 preset values.
inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::config_not_found, "configuration file not found: " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  return apply_key_values(case1_preset(), parse_config_text(buf.str()));
}

/// Checks everything except grid construction and parameter ranges, which
/// validate themselves. Snapshot times off the dt lattice are reported as
/// ErrorKind::snapshot_misalignment.
inline void validate(const RunConfig& c) {
  auto schema = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::schema_violation, what);
  };
  try {
    c.params.validate();
    c.step_config().validate();
    (void)c.grid.make();
  } catch (const Error& e) {
    fail(ErrorKind::schema_violation, e.what());
  }
  schema(c.t_end >= 0, "t_end must be nonnegative");
  schema(c.ic.sigma >= 0, "sigma must be nonnegative");
  schema(c.ic.u0 > 0 && c.ic.v0 > 0 && c.ic.w0 > 0, "base state must be positive");
  schema(c.diag_interval > 0, "diag_interval must be positive");
  if (c.fit_window) schema(c.fit_window->first < c.fit_window->second, "fit_window must satisfy lo < hi");
  if (!detail::steps_for(c.t_end, c.dt))
    fail(ErrorKind::snapshot_misalignment, "t_end is not a whole number of steps");
  if (!detail::steps_for(c.diag_interval, c.dt) || *detail::steps_for(c.diag_interval, c.dt) < 1)
    fail(ErrorKind::snapshot_misalignment, "diag_interval is not a whole number of steps");
  for (double t : c.snapshot_times) {
    schema(t >= 0 && t <= c.t_end, "snapshot time " + format_shortest(t) + " outside [0, t_end]");
    if (!detail::steps_for(t, c.dt))
      fail(ErrorKind::snapshot_misalignment, "snapshot time " + format_shortest(t) + " is not a multiple of dt");
  }
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

/// base + N(0, sigma²) independently at every node of every field, clamped to
/// the floor. Streams 0, 1, 2 key u, v, w; the counter is the row-major node.
inline State perturbed_ic(const InitialData& ic, std::uint64_t seed, const Grid& g, double floor) {
  const CounterNormal rng(seed);
  State s = State::uniform(g, ic.u0, ic.v0, ic.w0);
  Field* fields[] = {&s.u, &s.v, &s.w};
  for (std::uint32_t stream = 0; stream < 3; ++stream) {
    Field& f = *fields[stream];
    for (std::size_t n = 0; n < f.size(); ++n) {
      const double z = ic.sigma == 0.0 ? 0.0 : ic.sigma * rng.normal(stream, static_cast<std::uint32_t>(n));
      f[n] = std::max(f[n] + z, floor);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Run
// ---------------------------------------------------------------------------

struct FitOutcome {
  std::optional<DecayFit> fit;
  std::string error;
};

struct RunRecord {
  RunConfig config;
  StabilityAdvice stability;
  double wall_clock_seconds = 0.0;
  bool complete = false;
  std::string error;
  std::vector<DiagnosticsRecord> series;
  std::vector<std::string> artifacts;  // relative to out_dir
  std::map<std::string, FitOutcome> fits;  // sqrt_E, linf_u, linf_v, linf_w
  long total_clamps = 0;

  const DiagnosticsRecord& final_diagnostics() const { return series.back(); }
};

inline constexpr const char* chi_default_note =
    "chi1 and chi2 are not specified by the reference experiments; the presets use 0.5 for both";

inline std::string snapshot_name(const std::string& field, double t) {
  return "snap_" + field + "_t" + format_shortest(t) + ".csv";
}

namespace detail {

inline FitOutcome try_fit(const std::vector<TimeSample>& series, std::pair<double, double> window) {
  try {
    return {fit_exponential_rate(series, window.first, window.second), {}};
  } catch (const Error& e) {
    return {std::nullopt, e.what()};
  }
}

}  // namespace detail

/// Fits for sqrt(E) and the three max-norm distances.
inline std::map<std::string, FitOutcome> fit_all(const std::vector<DiagnosticsRecord>& series,
                                                 std::pair<double, double> window) {
  auto extract = [&](auto member) {
    std::vector<TimeSample> out;
    out.reserve(series.size());
    for (const auto& r : series) out.push_back({r.t, member(r)});
    return out;
  };
  std::map<std::string, FitOutcome> fits;
  fits["sqrt_E"] = detail::try_fit(extract([](const auto& r) { return std::sqrt(r.dissipation_E); }), window);
  fits["linf_u"] = detail::try_fit(extract([](const auto& r) { return r.linf_u; }), window);
  fits["linf_v"] = detail::try_fit(extract([](const auto& r) { return r.linf_v; }), window);
  fits["linf_w"] = detail::try_fit(extract([](const auto& r) { return r.linf_w; }), window);
  return fits;
}

inline nlohmann::ordered_json to_json(const std::map<std::string, FitOutcome>& fits) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, f] : fits) {
    if (f.fit) j[name] = *f.fit;
    else j[name] = {{"error", f.error}};
  }
  return j;
}

inline nlohmann::ordered_json to_json(const RunRecord& rec) {
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : to_key_values(rec.config)) cfg[k] = v;

  nlohmann::ordered_json j;
  j["config"] = cfg;
  j["note"] = chi_default_note;
  j["stability"] = {{"pass", rec.stability.pass}, {"dt", rec.stability.dt}, {"bound", rec.stability.bound}};
  j["warnings"] = nlohmann::ordered_json::array();
  if (!rec.stability.pass)
    j["warnings"].push_back("dt exceeds the diffusive stability bound " + format_shortest(rec.stability.bound));
  j["complete"] = rec.complete;
  j["error"] = rec.error;
  j["wall_clock_seconds"] = rec.wall_clock_seconds;
  j["total_clamps"] = rec.total_clamps;
  if (!rec.series.empty()) {
    j["final_diagnostics"] = rec.series.back();
    double ent = -std::numeric_limits<double>::infinity();
    for (const auto& r : rec.series) ent = std::max(ent, r.entropy);
    j["entropy_ceiling_observed"] = ent;
  }
  j["fits"] = to_json(rec.fits);
  j["artifacts"] = rec.artifacts;
  return j;
}

/// Executes the full protocol and writes into config.out_dir:
/// snap_<field>_t<time>.csv for u, v, w at each snapshot time,
/// diagnostics.jsonl, and run.json. Non-finite values abort the run after
/// run.json is written with "complete": false.
inline RunRecord run(const RunConfig& config) {
  validate(config);
  const auto started = std::chrono::steady_clock::now();
  namespace fs = std::filesystem;

  RunRecord rec;
  rec.config = config;
  const Grid grid = config.grid.make();
  const StepConfig step = config.step_config();
  const Equilibrium eq = equilibrium(config.params);
  rec.stability = check_stability(step, grid);

  const fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());

  const long n_end = *detail::steps_for(config.t_end, config.dt);
  const long diag_every = *detail::steps_for(config.diag_interval, config.dt);
  std::map<long, std::vector<double>> snapshot_steps;  // step -> requested times
  for (double t : config.snapshot_times) snapshot_steps[*detail::steps_for(t, config.dt)].push_back(t);

  std::ofstream diag(dir / "diagnostics.jsonl", std::ios::binary);
  if (!diag) fail(ErrorKind::io, "cannot open diagnostics.jsonl in " + dir.string());
  rec.artifacts.push_back("diagnostics.jsonl");

  auto write_run_json = [&] {
    rec.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::ofstream os(dir / "run.json", std::ios::binary);
    if (!os) fail(ErrorKind::io, "cannot write run.json in " + dir.string());
    os << to_json(rec).dump(2) << "\n";
  };

  auto observe = [&](const State& s, long step_index, long clamps) {
    const bool snap = snapshot_steps.count(step_index) > 0;
    if (step_index % diag_every == 0 || snap || step_index == n_end) {
      rec.series.push_back(collect(s, eq, config.params, clamps, step.face_rule));
      diag << to_jsonl_line(rec.series.back());
      clamps = 0;
    }
    if (snap) {
      for (double t : snapshot_steps[step_index]) {
        for (auto [name, field] : {std::pair{"u", &s.u}, std::pair{"v", &s.v}, std::pair{"w", &s.w}}) {
          const std::string file = snapshot_name(name, t);
          write_field_csv((dir / file).string(), *field, s.t);
          rec.artifacts.push_back(file);
        }
      }
    }
    return clamps;
  };

  try {
    State s = perturbed_ic(config.ic, config.seed, grid, config.floor);
    long pending_clamps = observe(s, 0, 0);
    for (long n = 1; n <= n_end; ++n) {
      StepResult r = euler_step(s, config.params, step, n);
      s = std::move(r.state);
      rec.total_clamps += r.clamp_count;
      pending_clamps = observe(s, n, pending_clamps + r.clamp_count);
    }
  } catch (const Error& e) {
    rec.error = e.what();
    diag.close();
    write_run_json();
    throw;
  }
  diag.close();
  if (!diag) fail(ErrorKind::io, "write failed: diagnostics.jsonl");

  rec.fits = fit_all(rec.series, config.effective_fit_window());
  rec.complete = true;
  rec.artifacts.push_back("run.json");
  write_run_json();
  return rec;
}

}  // namespace chemotaxis
