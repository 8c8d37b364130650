// Command-line front end for the chemotaxis simulator.
//
//   chemotaxis_cli run --config <file> [--<key> <value> ...]
//   chemotaxis_cli case1 [--<key> <value> ...]
//   chemotaxis_cli case2 [--<key> <value> ...]
//   chemotaxis_cli fit --diagnostics <diagnostics.jsonl> --window <lo>,<hi>
//   chemotaxis_cli stability --dt <dt> --nx <nx> --lx <lx> [--ny <ny>] [--ly <ly>]
//
// Every configuration key is accepted as a flag, with '_' spelled '-'
// (t_end -> --t-end). Exit codes are listed in README.md.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "chemotaxis.hpp"

namespace {

namespace cx = chemotaxis;

enum ExitCode : int {
  exit_ok = 0,
  exit_internal = 1,
  exit_usage = 2,
  exit_config_not_found = 3,
  exit_schema = 4,
  exit_misaligned = 5,
  exit_non_finite = 6,
  exit_io = 7,
  exit_invalid = 8,
};

int exit_code_for(cx::ErrorKind kind) {
  switch (kind) {
    case cx::ErrorKind::config_not_found: return exit_config_not_found;
    case cx::ErrorKind::schema_violation: return exit_schema;
    case cx::ErrorKind::snapshot_misalignment: return exit_misaligned;
    case cx::ErrorKind::non_finite: return exit_non_finite;
    case cx::ErrorKind::io: return exit_io;
    case cx::ErrorKind::invalid_argument: return exit_invalid;
  }
  return exit_internal;
}

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

/// Registers one string option per configuration key; returns the storage.
std::map<std::string, std::string>& add_overrides(CLI::App* app, std::map<std::string, std::string>& store) {
  for (const auto& key : cx::config_keys()) app->add_option(flag_name(key), store[key], "override '" + key + "'");
  return store;
}

cx::KeyValues collect_overrides(CLI::App* app, const std::map<std::string, std::string>& store) {
  cx::KeyValues kv;
  for (const auto& key : cx::config_keys())
    if (app->count(flag_name(key)) > 0) kv.emplace_back(key, store.at(key));
  return kv;
}

void print_summary(const cx::RunRecord& rec) {
  const auto& f = rec.final_diagnostics();
  std::cout << "run complete: " << rec.config.out_dir << "\n"
            << "  t = " << cx::format_shortest(f.t) << "  linf(u,v,w) = " << f.linf_u << ", " << f.linf_v << ", "
            << f.linf_w << "\n"
            << "  stability advisory: " << (rec.stability.pass ? "pass" : "warn") << " (bound "
            << rec.stability.bound << ")\n";
  for (const auto& [name, fit] : rec.fits) {
    if (fit.fit)
      std::cout << "  fit " << name << ": lambda = " << fit.fit->lambda << ", C = " << fit.fit->c_amp
                << ", residual = " << fit.fit->residual << "\n";
    else
      std::cout << "  fit " << name << ": " << fit.error << "\n";
  }
}

int run_config(const cx::RunConfig& config, bool preset) {
  if (preset) std::cout << "NOTE: " << cx::chi_default_note << " (chi1 = " << config.params.chi1
                        << ", chi2 = " << config.params.chi2 << ")\n";
  const cx::RunRecord rec = cx::run(config);
  print_summary(rec);
  return exit_ok;
}

std::vector<cx::DiagnosticsRecord> read_diagnostics(const std::string& path) {
  std::ifstream is(path);
  if (!is) cx::fail(cx::ErrorKind::config_not_found, "diagnostics file not found: " + path);
  std::vector<cx::DiagnosticsRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<cx::DiagnosticsRecord>());
    } catch (const nlohmann::json::exception& e) {
      cx::fail(cx::ErrorKind::schema_violation, "bad diagnostics line: " + std::string(e.what()));
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit finite-volume simulator for a two-species chemotaxis system with singular sensitivity"};
  app.require_subcommand(1);

  std::map<std::string, std::string> run_store, case1_store, case2_store;

  auto* run_cmd = app.add_subcommand("run", "execute a run described by a configuration file");
  std::string config_path;
  run_cmd->add_option("--config", config_path, "configuration file (key = value lines)")->required();
  add_overrides(run_cmd, run_store);

  auto* case1_cmd = app.add_subcommand("case1", "preset: k = 0.8, mu1 = 0.8, mu2 = 0.9, r = 0.1, t_end = 1000");
  add_overrides(case1_cmd, case1_store);
  auto* case2_cmd = app.add_subcommand("case2", "preset: k = 1, mu1 = 0.8, mu2 = 0.9, r = 0.1, t_end = 1600");
  add_overrides(case2_cmd, case2_store);

  auto* fit_cmd = app.add_subcommand("fit", "refit decay rates from a stored diagnostics.jsonl");
  std::string diag_path;
  std::vector<double> window;
  fit_cmd->add_option("--diagnostics", diag_path, "diagnostics.jsonl")->required();
  fit_cmd->add_option("--window", window, "fit window lo,hi")->required()->delimiter(',')->expected(2);

  auto* stab_cmd = app.add_subcommand("stability", "print the explicit-Euler diffusive stability advisory");
  double dt = 0.0, lx = 0.0, ly = 0.0;
  int nx = 0, ny = 0;
  stab_cmd->add_option("--dt", dt, "time step")->required();
  stab_cmd->add_option("--nx", nx, "nodes in x")->required();
  stab_cmd->add_option("--lx", lx, "domain length in x")->required();
  stab_cmd->add_option("--ny", ny, "nodes in y (default: nx)");
  stab_cmd->add_option("--ly", ly, "domain length in y (default: lx)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }

  try {
    if (*run_cmd) {
      const cx::RunConfig base = cx::load_config(config_path);
      return run_config(cx::apply_key_values(base, collect_overrides(run_cmd, run_store)), false);
    }
    if (*case1_cmd) return run_config(cx::apply_key_values(cx::case1_preset(), collect_overrides(case1_cmd, case1_store)), true);
    if (*case2_cmd) return run_config(cx::apply_key_values(cx::case2_preset(), collect_overrides(case2_cmd, case2_store)), true);
    if (*fit_cmd) {
      const auto series = read_diagnostics(diag_path);
      const auto fits = cx::fit_all(series, {window.at(0), window.at(1)});
      std::cout << cx::to_json(fits).dump(2) << "\n";
      const bool any = std::any_of(fits.begin(), fits.end(), [](const auto& f) { return f.second.fit.has_value(); });
      return any ? exit_ok : exit_invalid;
    }
    if (*stab_cmd) {
      const cx::Grid g = cx::make_grid(nx, ny > 0 ? ny : nx, lx, ly > 0 ? ly : lx);
      cx::StepConfig step;
      step.dt = dt;
      step.validate();
      const auto adv = cx::check_stability(step, g);
      std::cout << (adv.pass ? "pass" : "warn") << " dt=" << cx::format_shortest(dt)
                << " bound=" << cx::format_shortest(adv.bound) << "\n";
      return exit_ok;
    }
  } catch (const cx::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_internal;
  }
  return exit_usage;
}
