#pragma once

#include <cmath>

#include "chemotaxis/error.hpp"

namespace chemotaxis {

/// Coefficients of the two-species, one-signal chemotaxis system
///
///   u_t = Δu - chi1 ∇·(u w^-k ∇w) + w - mu1 u²
///   v_t = Δv - chi2 ∇·(v w^-k ∇w) + w + r u v - mu2 v²
///   w_t = Δw + u + v - w
///
/// with homogeneous Neumann conditions on every field.
struct Params {
  double chi1 = 0.5;  // not fixed by the reference experiments; see README
  double chi2 = 0.5;
  double mu1 = 0.8;
  double mu2 = 0.9;
  double r = 0.1;
  double k = 0.8;  // (0, 1]; k = 1 is the classical logarithmic sensitivity

  void validate() const {
    require(chi1 > 0 && chi2 > 0, "chi1 and chi2 must be positive");
    require(mu1 > 0 && mu2 > 0, "mu1 and mu2 must be positive");
    require(r > 0, "r must be positive");
    require(k > 0 && k <= 1, "k must lie in (0, 1]");
  }

  friend bool operator==(const Params&, const Params&) = default;
};

/// chi * w^-k. Throws on w <= 0.
inline double sensitivity(double w, double chi, double k) {
  require(w > 0, "sensitivity evaluated at nonpositive signal");
  return chi * std::pow(w, -k);
}

/// Spatially constant steady state. `a` is the positive root of
/// mu2 a² - r a - mu1 = 0, i.e. v*/u*.
struct Equilibrium {
  double a = 0.0;
  double u_star = 0.0;
  double v_star = 0.0;
  double w_star = 0.0;
};

inline Equilibrium equilibrium(const Params& p) {
  const double a = (p.r + std::sqrt(p.r * p.r + 4.0 * p.mu1 * p.mu2)) / (2.0 * p.mu2);
  const double u = (1.0 + a) / p.mu1;
  return Equilibrium{a, u, a * u, p.mu1 * u * u};
}

}  // namespace chemotaxis
