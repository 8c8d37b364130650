#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "chemotaxis/grid.hpp"
#include "chemotaxis/params.hpp"
#include "chemotaxis/state.hpp"

namespace chemotaxis {

/// How the density is evaluated on a cell face for the chemotactic flux.
enum class FaceRule {
  centered,  // arithmetic mean of the two adjacent nodes
  upwind,    // node the flux leaves from
};

struct RhsTriple {
  Field du;
  Field dv;
  Field dw;
};

/// Five-point Laplacian. Boundary nodes read a mirrored ghost value, so the
/// outward normal derivative is zero.
inline Field laplacian(const Field& f) {
  const Grid& g = f.grid();
  const double ix2 = 1.0 / (g.dx * g.dx);
  const double iy2 = 1.0 / (g.dy * g.dy);
  Field out(g);
  for (int j = 0; j < g.ny; ++j) {
    const int jm = j == 0 ? 1 : j - 1;
    const int jp = j == g.ny - 1 ? g.ny - 2 : j + 1;
    for (int i = 0; i < g.nx; ++i) {
      const int im = i == 0 ? 1 : i - 1;
      const int ip = i == g.nx - 1 ? g.nx - 2 : i + 1;
      const double c = f(i, j);
      out(i, j) = (f(ip, j) - 2.0 * c + f(im, j)) * ix2 + (f(i, jp) - 2.0 * c + f(i, jm)) * iy2;
    }
  }
  return out;
}

namespace detail {

/// chi * n_face * (w_b - w_a)/h / w_face^k across the face between nodes a and b
/// (b downstream in the positive axis direction).
inline double face_flux(double n_a, double n_b, double w_a, double w_b, double h, double chi, double k,
                        FaceRule rule) {
  const double grad = (w_b - w_a) / h;
  const double w_face = 0.5 * (w_a + w_b);
  double n_face;
  if (rule == FaceRule::centered)
    n_face = 0.5 * (n_a + n_b);
  else
    n_face = grad >= 0.0 ? n_a : n_b;
  return chi * n_face * grad / std::pow(w_face, k);
}

inline void require_positive_signal(const Field& w) {
  for (std::size_t n = 0; n < w.size(); ++n)
    if (!(w[n] > 0.0)) fail(ErrorKind::invalid_argument, "chemotaxis flux needs w > 0 (node " + std::to_string(n) + ")");
}

}  // namespace detail

/// Finite-volume approximation of ∇·(n chi w^-k ∇w).
///
/// Fluxes live on the faces between neighbouring nodes; faces on the domain
/// boundary carry zero flux. A boundary node owns half a cell along the normal
/// axis, so its divergence divides by dx/2 (dy/2). Together with the
/// trapezoidal weights of integrate() the interior fluxes telescope and the
/// discrete integral of the result is zero.
inline Field chemotaxis_divergence(const Field& n, const Field& w, double chi, double k,
                                   FaceRule rule = FaceRule::centered) {
  require_same_grid(n, w);
  detail::require_positive_signal(w);
  const Grid& g = n.grid();
  Field out(g);

  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const double F = detail::face_flux(n(i, j), n(i + 1, j), w(i, j), w(i + 1, j), g.dx, chi, k, rule);
      out(i, j) += F;
      out(i + 1, j) -= F;
    }
  }
  for (int i = 0; i < g.nx; ++i) {
    const double hx = (i == 0 || i == g.nx - 1) ? 0.5 * g.dx : g.dx;
    for (int j = 0; j < g.ny; ++j) out(i, j) /= hx;
  }

  Field ydiv(g);
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double F = detail::face_flux(n(i, j), n(i, j + 1), w(i, j), w(i, j + 1), g.dy, chi, k, rule);
      ydiv(i, j) += F;
      ydiv(i, j + 1) -= F;
    }
  }
  for (int j = 0; j < g.ny; ++j) {
    const double hy = (j == 0 || j == g.ny - 1) ? 0.5 * g.dy : g.dy;
    for (int i = 0; i < g.nx; ++i) out(i, j) += ydiv(i, j) / hy;
  }
  return out;
}

/// Largest |face flux| of the chemotactic transport of n.
inline double max_chemotaxis_flux(const Field& n, const Field& w, double chi, double k,
                                  FaceRule rule = FaceRule::centered) {
  require_same_grid(n, w);
  detail::require_positive_signal(w);
  const Grid& g = n.grid();
  double m = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i)
      m = std::max(m, std::abs(detail::face_flux(n(i, j), n(i + 1, j), w(i, j), w(i + 1, j), g.dx, chi, k, rule)));
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      m = std::max(m, std::abs(detail::face_flux(n(i, j), n(i, j + 1), w(i, j), w(i, j + 1), g.dy, chi, k, rule)));
  return m;
}

/// Local kinetics, nodewise.
inline RhsTriple reaction(const Field& u, const Field& v, const Field& w, const Params& p) {
  require_same_grid(u, v);
  require_same_grid(u, w);
  const Grid& g = u.grid();
  RhsTriple out{Field(g), Field(g), Field(g)};
  for (std::size_t n = 0; n < g.size(); ++n) {
    out.du[n] = w[n] - p.mu1 * u[n] * u[n];
    out.dv[n] = w[n] + p.r * u[n] * v[n] - p.mu2 * v[n] * v[n];
    out.dw[n] = u[n] + v[n] - w[n];
  }
  return out;
}

/// Full right-hand side: diffusion, minus chemotactic drift, plus kinetics.
inline RhsTriple assemble_rhs(const State& s, const Params& p, FaceRule rule = FaceRule::centered) {
  RhsTriple rhs = reaction(s.u, s.v, s.w, p);
  const Field lu = laplacian(s.u);
  const Field lv = laplacian(s.v);
  const Field lw = laplacian(s.w);
  const Field cu = chemotaxis_divergence(s.u, s.w, p.chi1, p.k, rule);
  const Field cv = chemotaxis_divergence(s.v, s.w, p.chi2, p.k, rule);
  for (std::size_t n = 0; n < s.u.size(); ++n) {
    rhs.du[n] = lu[n] - cu[n] + rhs.du[n];
    rhs.dv[n] = lv[n] - cv[n] + rhs.dv[n];
    rhs.dw[n] = lw[n] + rhs.dw[n];
  }
  return rhs;
}

}  // namespace chemotaxis
