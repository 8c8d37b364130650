#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "chemotaxis/grid.hpp"
#include "chemotaxis/operators.hpp"
#include "chemotaxis/params.hpp"
#include "chemotaxis/state.hpp"

namespace chemotaxis {

struct DiagnosticsRecord {
  double t = 0.0;
  double mass_u = 0.0, mass_v = 0.0, mass_w = 0.0;
  double linf_u = 0.0, linf_v = 0.0, linf_w = 0.0;  // max |field - equilibrium|
  double min_u = 0.0, min_v = 0.0, min_w = 0.0;
  double max_u = 0.0, max_v = 0.0, max_w = 0.0;
  double entropy = 0.0;
  double lyapunov_F = 0.0;
  double dissipation_E = 0.0;
  long clamp_count = 0;  // clamps since the previous record
  double max_chemo_flux = 0.0;

  friend bool operator==(const DiagnosticsRecord&, const DiagnosticsRecord&) = default;
};

#define CHEMOTAXIS_DIAGNOSTICS_FIELDS(X)                                                                      \
  X(t) X(mass_u) X(mass_v) X(mass_w) X(linf_u) X(linf_v) X(linf_w) X(min_u) X(min_v) X(min_w) X(max_u) X(max_v) \
  X(max_w) X(entropy) X(lyapunov_F) X(dissipation_E) X(clamp_count) X(max_chemo_flux)

template <class Json>
void to_json(Json& j, const DiagnosticsRecord& r) {
#define CHEMOTAXIS_PUT(name) j[#name] = r.name;
  CHEMOTAXIS_DIAGNOSTICS_FIELDS(CHEMOTAXIS_PUT)
#undef CHEMOTAXIS_PUT
}

template <class Json>
void from_json(const Json& j, DiagnosticsRecord& r) {
#define CHEMOTAXIS_GET(name) j.at(#name).get_to(r.name);
  CHEMOTAXIS_DIAGNOSTICS_FIELDS(CHEMOTAXIS_GET)
#undef CHEMOTAXIS_GET
}

namespace detail {

/// ref * (s - 1 - ln s) with s = x/ref, evaluated without cancellation near s = 1.
inline double relative_entropy_density(double x, double ref) {
  require(x > 0, "relative entropy needs positive values");
  const double d = (x - ref) / ref;
  double g;
  if (std::abs(d) < 1e-3) {
    const double d2 = d * d;
    g = d2 * (0.5 - d / 3.0 + d2 / 4.0 - d2 * d / 5.0 + d2 * d2 / 6.0);
  } else {
    g = d - std::log1p(d);
  }
  return ref * std::max(g, 0.0);
}

inline double max_distance(const Field& f, double value) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x - value));
  return m;
}

}  // namespace detail

/// F = ∫ (u - u* - u* ln(u/u*)) + ∫ (v - ...) + 2 ∫ (w - ...).
inline double lyapunov_F(const State& s, const Equilibrium& eq) {
  auto part = [](const Field& f, double ref) {
    return integrate_map(f, [ref](double x) { return detail::relative_entropy_density(x, ref); });
  };
  return part(s.u, eq.u_star) + part(s.v, eq.v_star) + 2.0 * part(s.w, eq.w_star);
}

/// E = ∫ (u - u*)² + ∫ (v - v*)².
inline double dissipation_E(const State& s, const Equilibrium& eq) {
  const double us = eq.u_star, vs = eq.v_star;
  return integrate_map(s.u, [us](double x) { return (x - us) * (x - us); }) +
         integrate_map(s.v, [vs](double x) { return (x - vs) * (x - vs); });
}

/// ∫ u ln u + ∫ v ln v.
inline double entropy(const State& s) {
  auto xlogx = [](double x) {
    require(x > 0, "entropy needs positive densities");
    return x * std::log(x);
  };
  return integrate_map(s.u, xlogx) + integrate_map(s.v, xlogx);
}

inline DiagnosticsRecord collect(const State& s, const Equilibrium& eq, const Params& p, long clamp_count,
                                 FaceRule rule = FaceRule::centered) {
  DiagnosticsRecord r;
  r.t = s.t;
  r.mass_u = integrate(s.u);
  r.mass_v = integrate(s.v);
  r.mass_w = integrate(s.w);
  r.linf_u = detail::max_distance(s.u, eq.u_star);
  r.linf_v = detail::max_distance(s.v, eq.v_star);
  r.linf_w = detail::max_distance(s.w, eq.w_star);
  r.min_u = s.u.min();
  r.min_v = s.v.min();
  r.min_w = s.w.min();
  r.max_u = s.u.max();
  r.max_v = s.v.max();
  r.max_w = s.w.max();
  r.entropy = entropy(s);
  r.lyapunov_F = lyapunov_F(s, eq);
  r.dissipation_E = dissipation_E(s, eq);
  r.clamp_count = clamp_count;
  r.max_chemo_flux = std::max(max_chemotaxis_flux(s.u, s.w, p.chi1, p.k, rule),
                              max_chemotaxis_flux(s.v, s.w, p.chi2, p.k, rule));
  return r;
}

inline std::string to_jsonl_line(const DiagnosticsRecord& r) { return nlohmann::ordered_json(r).dump() + "\n"; }

// ---------------------------------------------------------------------------
// Exponential rate fitting: y ≈ C exp(-lambda t), least squares on ln y.
// ---------------------------------------------------------------------------

struct DecayFit {
  double c_amp = 0.0;
  double lambda = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double residual = 0.0;  // RMS of ln y - (ln C - lambda t)
  int samples = 0;
};

template <class Json>
void to_json(Json& j, const DecayFit& f) {
  j = Json{{"c_amp", f.c_amp}, {"lambda", f.lambda}, {"t_lo", f.t_lo},
           {"t_hi", f.t_hi},   {"residual", f.residual}, {"samples", f.samples}};
}

struct TimeSample {
  double t;
  double y;
};

inline DecayFit fit_exponential_rate(std::span<const TimeSample> series, double t_lo, double t_hi) {
  require(t_lo < t_hi, "fit window must satisfy t_lo < t_hi");
  std::vector<double> ts, ls;
  for (const auto& s : series) {
    if (s.t < t_lo || s.t > t_hi) continue;
    if (!(s.y > 0) || !std::isfinite(s.y))
      fail(ErrorKind::invalid_argument, "fit needs positive samples (t=" + format_double(s.t) + ")");
    ts.push_back(s.t);
    ls.push_back(std::log(s.y));
  }
  if (ts.size() < 5) fail(ErrorKind::invalid_argument, "fit window holds fewer than 5 samples");

  const double m = static_cast<double>(ts.size());
  double tbar = 0, lbar = 0;
  for (std::size_t n = 0; n < ts.size(); ++n) {
    tbar += ts[n];
    lbar += ls[n];
  }
  tbar /= m;
  lbar /= m;
  double stt = 0, stl = 0;
  for (std::size_t n = 0; n < ts.size(); ++n) {
    stt += (ts[n] - tbar) * (ts[n] - tbar);
    stl += (ts[n] - tbar) * (ls[n] - lbar);
  }
  const double slope = stl / stt;
  const double intercept = lbar - slope * tbar;
  double ss = 0;
  for (std::size_t n = 0; n < ts.size(); ++n) {
    const double e = ls[n] - (intercept + slope * ts[n]);
    ss += e * e;
  }
  return DecayFit{std::exp(intercept), -slope, t_lo, t_hi, std::sqrt(ss / m), static_cast<int>(ts.size())};
}

}  // namespace chemotaxis
