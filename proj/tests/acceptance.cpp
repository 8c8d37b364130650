// Acceptance suite. Prints one PASS/FAIL line per criterion.
//
//   acceptance [--only <id>] [--work-dir <dir>]
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chemotaxis.hpp"

using namespace chemotaxis;
namespace fs = std::filesystem;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class Runs {
 public:
  explicit Runs(fs::path root) : root_(std::move(root)) {}

  const RunRecord& case1() { return cached(case1_, "case1", case1_preset()); }
  const RunRecord& case1_repeat() { return cached(case1_repeat_, "case1_repeat", case1_preset()); }
  const RunRecord& case2() { return cached(case2_, "case2", case2_preset()); }

 private:
  const RunRecord& cached(std::optional<RunRecord>& slot, const std::string& name, RunConfig c) {
    if (!slot) {
      c.out_dir = (root_ / name).string();
      fs::remove_all(c.out_dir);
      slot = run(c);
    }
    return *slot;
  }

  fs::path root_;
  std::optional<RunRecord> case1_, case1_repeat_, case2_;
};

std::vector<TimeSample> sqrt_E_series(const RunRecord& rec) {
  std::vector<TimeSample> out;
  for (const auto& r : rec.series) out.push_back({r.t, std::sqrt(r.dissipation_E)});
  return out;
}

std::optional<DecayFit> try_fit(const RunRecord& rec, double lo, double hi, std::string& why) {
  try {
    return fit_exponential_rate(sqrt_E_series(rec), lo, hi);
  } catch (const Error& e) {
    why = e.what();
    return std::nullopt;
  }
}

std::string describe(const std::optional<DecayFit>& f, const std::string& why) {
  if (!f) return "fit rejected (" + why + ")";
  return "lambda=" + fmt(f->lambda) + " C=" + fmt(f->c_amp) + " residual=" + fmt(f->residual);
}

// Fit over the window in which sqrt(E) is still above round-off. Printed next
// to the decay criteria for context; never used for pass/fail.
std::string early_window_fit(const RunRecord& rec) {
  std::string why;
  return describe(try_fit(rec, 5, 50, why), why);
}

// --- criteria --------------------------------------------------------------

Outcome equilibrium_exactness(Runs&) {
  const Equilibrium e = equilibrium(case1_preset().params);
  const double err = std::max({std::abs(e.a - 1.0), std::abs(e.u_star - 2.5), std::abs(e.v_star - 2.5),
                               std::abs(e.w_star - 5.0)});
  return {err <= 1e-12, "a=" + fmt(e.a) + " (u*,v*,w*)=(" + fmt(e.u_star) + "," + fmt(e.v_star) + "," +
                            fmt(e.w_star) + ") max abs err=" + fmt(err)};
}

Outcome fixed_point(Runs&) {
  const RunConfig c = case1_preset();
  const Grid g = c.grid.make();
  const State start = State::uniform(g, 2.5, 2.5, 5.0);
  State s = start;
  long clamps = 0;
  for (long n = 1; n <= 100000; ++n) {
    StepResult r = euler_step(s, c.params, c.step_config(), n);
    clamps += r.clamp_count;
    s = std::move(r.state);
  }
  double change = 0;
  for (std::size_t m = 0; m < g.size(); ++m)
    change = std::max({change, std::abs(s.u[m] - start.u[m]), std::abs(s.v[m] - start.v[m]),
                       std::abs(s.w[m] - start.w[m])});
  return {change <= 1e-12 && clamps == 0, "1e5 steps, max nodal change=" + fmt(change) + " (<= 1e-12)"};
}

Outcome convergence(Runs& runs) {
  const auto& f = runs.case1().final_diagnostics();
  const double sum = f.linf_u + f.linf_v + f.linf_w;
  return {f.t == 1000.0 && sum < 1e-2, "t=" + fmt(f.t) + " linf_u+linf_v+linf_w=" + fmt(sum) + " (< 1e-2)"};
}

Outcome exponential_decay(Runs& runs) {
  std::string why;
  const auto fit = try_fit(runs.case1(), 100, 500, why);
  const bool pass = fit && fit->lambda > 0 && fit->residual < 0.5;
  return {pass, "window [100,500] on sqrt(E): " + describe(fit, why) + " (need lambda>0, residual<0.5)" +
                    " | context, window [5,50]: " + early_window_fit(runs.case1())};
}

Outcome k_dependence(Runs& runs) {
  std::string why1, why2;
  const auto f1 = try_fit(runs.case1(), 100, 500, why1);
  const auto f2 = try_fit(runs.case2(), 100, 500, why2);
  const bool pass = f1 && f2 && f1->lambda < f2->lambda;
  return {pass, "window [100,500]: k=0.8 " + describe(f1, why1) + "; k=1 " + describe(f2, why2) +
                    " (need lambda(0.8) < lambda(1)) | context, window [5,50]: k=0.8 " +
                    early_window_fit(runs.case1()) + "; k=1 " + early_window_fit(runs.case2())};
}

Outcome lyapunov_monotone(Runs& runs) {
  const auto& s = runs.case1().series;
  int checked = 0, violations = 0;
  double worst = 0;
  for (std::size_t n = 0; n + 1 < s.size(); ++n) {
    if (s[n].t <= 5.0) continue;
    ++checked;
    const double rise = s[n + 1].lyapunov_F - s[n].lyapunov_F;
    if (rise > 1e-8 * std::abs(s[n].lyapunov_F)) {
      ++violations;
      worst = std::max(worst, rise / std::abs(s[n].lyapunov_F));
    }
  }
  bool nonneg = true;
  for (const auto& r : s) nonneg = nonneg && r.lyapunov_F >= 0 && r.dissipation_E >= 0;
  return {violations == 0 && checked > 0 && nonneg,
          std::to_string(checked) + " sample pairs with t>5, " + std::to_string(violations) +
              " increases beyond 1e-8 relative (worst " + fmt(worst) + "), F,E >= 0: " + (nonneg ? "yes" : "no")};
}

Outcome conservation(Runs&) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> val(1e-3, 5.0), kdist(0.05, 1.0), chid(0.1, 2.0);
  auto l1 = [](const Field& f) { return integrate(f.map([](double x) { return std::abs(x); })); };
  double worst_chemo = 0, worst_lap = 0;
  int pairs = 0;
  for (int nodes : {13, 33}) {
    const Grid g = make_grid(nodes, nodes, two_pi, two_pi);
    for (int trial = 0; trial < 100; ++trial, ++pairs) {
      Field n(g), w(g);
      for (auto& x : n.values()) x = val(rng);
      for (auto& x : w.values()) x = val(rng);
      const Field d = chemotaxis_divergence(n, w, chid(rng), kdist(rng));
      const Field l = laplacian(n);
      worst_chemo = std::max(worst_chemo, std::abs(integrate(d)) / l1(d));
      worst_lap = std::max(worst_lap, std::abs(integrate(l)) / l1(l));
    }
  }
  return {worst_chemo <= 1e-12 && worst_lap <= 1e-12,
          std::to_string(pairs) + " pairs, worst relative |integral|: chemotaxis=" + fmt(worst_chemo) +
              " laplacian=" + fmt(worst_lap) + " (<= 1e-12)"};
}

Outcome stencil_order(Runs&) {
  auto err = [](int nodes) {
    const Grid g = make_grid(nodes, nodes, two_pi, two_pi);
    const Field f = Field::from_function(g, [](double x, double y) { return std::cos(x) * std::cos(y); });
    const Field lap = laplacian(f);
    double e = 0;
    for (std::size_t m = 0; m < g.size(); ++m) e = std::max(e, std::abs(lap[m] + 2.0 * f[m]));
    return e;
  };
  const double ratio = err(17) / err(33);
  return {ratio >= 3.2 && ratio <= 4.8, "max-norm error ratio 17x17 / 33x33 = " + fmt(ratio) + " (in [3.2, 4.8])"};
}

Outcome positivity_boundedness(Runs& runs) {
  std::string detail;
  bool pass = true;
  for (const auto* rec : {&runs.case1(), &runs.case2()}) {
    const auto& s = rec->series;
    double min_all = INFINITY;
    DiagnosticsRecord early{};  // maxima over t in [0, 1]
    for (const auto& r : s) {
      min_all = std::min({min_all, r.min_u, r.min_v, r.min_w});
      if (r.t > 1.0) continue;
      early.mass_u = std::max(early.mass_u, r.mass_u);
      early.mass_v = std::max(early.mass_v, r.mass_v);
      early.mass_w = std::max(early.mass_w, r.mass_w);
      early.max_u = std::max(early.max_u, r.max_u);
      early.max_v = std::max(early.max_v, r.max_v);
      early.max_w = std::max(early.max_w, r.max_w);
      early.linf_u = std::max(early.linf_u, r.linf_u);
      early.linf_v = std::max(early.linf_v, r.linf_v);
      early.linf_w = std::max(early.linf_w, r.linf_w);
    }
    double worst_ratio = 0;
    long late_clamps = 0;
    for (const auto& r : s) {
      const std::pair<double, double> checks[] = {
          {r.mass_u, early.mass_u}, {r.mass_v, early.mass_v}, {r.mass_w, early.mass_w},
          {r.max_u, early.max_u},   {r.max_v, early.max_v},   {r.max_w, early.max_w},
          {r.linf_u, early.linf_u}, {r.linf_v, early.linf_v}, {r.linf_w, early.linf_w}};
      for (auto [x, cap] : checks) worst_ratio = std::max(worst_ratio, x / cap);
      if (r.t > 1.0) late_clamps += r.clamp_count;
    }
    const bool ok = min_all >= 1e-6 && worst_ratio <= 3.0 && late_clamps == 0;
    pass = pass && ok;
    detail += "k=" + fmt(rec->config.params.k) + ": min=" + fmt(min_all) + ", worst ratio to [0,1] max=" +
              fmt(worst_ratio) + ", clamps(t>1)=" + std::to_string(late_clamps) + "; ";
  }
  return {pass, detail};
}

Outcome determinism(Runs& runs) {
  const auto& a = runs.case1();
  const auto& b = runs.case1_repeat();
  const fs::path da(a.config.out_dir), db(b.config.out_dir);
  int compared = 0, differing = 0;
  for (const auto& file : a.artifacts) {
    if (file == "run.json") continue;  // carries wall-clock time
    ++compared;
    const std::string x = slurp(da / file);
    if (x.empty() || x != slurp(db / file)) ++differing;
  }
  return {differing == 0 && compared == 13,
          std::to_string(compared) + " artifacts compared (diagnostics.jsonl + 12 snapshots), " +
              std::to_string(differing) + " differ"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome(Runs&)> check;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  fs::path work = fs::temp_directory_path() / "chemotaxis_acceptance";
  for (int n = 1; n < argc; ++n) {
    const std::string a = argv[n];
    if (a == "--only" && n + 1 < argc) {
      only = std::stoi(argv[++n]);
    } else if (a == "--work-dir" && n + 1 < argc) {
      work = argv[++n];
    } else {
      std::cerr << "usage: acceptance [--only <id>] [--work-dir <dir>]\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "equilibrium exactness", equilibrium_exactness},
      {2, "fixed-point preservation", fixed_point},
      {3, "convergence to steady state", convergence},
      {4, "exponential decay fit", exponential_decay},
      {5, "k-dependence of decay rate", k_dependence},
      {6, "Lyapunov monotonicity", lyapunov_monotone},
      {7, "conservation", conservation},
      {8, "stencil order", stencil_order},
      {9, "positivity and boundedness", positivity_boundedness},
      {10, "determinism", determinism},
  };

  Runs runs(work);
  int failures = 0, ran = 0;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    ++ran;
    Outcome o;
    try {
      o = c.check(runs);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << o.detail << std::endl;
  }
  if (ran == 0) {
    std::cerr << "no criterion with id " << only << "\n";
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
