#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "chemotaxis/error.hpp"
#include "chemotaxis/operators.hpp"
#include "chemotaxis/state.hpp"

namespace chemotaxis {

inline constexpr double default_floor = 1e-6;

struct StepConfig {
  double dt = 0.01;
  double floor = default_floor;
  FaceRule face_rule = FaceRule::centered;

  void validate() const {
    require(dt > 0 && std::isfinite(dt), "dt must be positive");
    require(floor > 0 && std::isfinite(floor), "floor must be positive");
  }
};

struct StepResult {
  State state;
  long clamp_count = 0;  // nodes (over all three fields) raised to the floor
};

/// Forward Euler: every field is advanced from the same pre-step state, then
/// clamped to max(., floor). `step_index` is used for the new time so that
/// t = step_index * dt carries no accumulated rounding.
inline StepResult euler_step(const State& s, const Params& p, const StepConfig& c, long step_index) {
  const RhsTriple rhs = assemble_rhs(s, p, c.face_rule);
  StepResult res{State{Field(s.grid()), Field(s.grid()), Field(s.grid()), step_index * c.dt}, 0};

  auto advance = [&](const Field& old, const Field& rate, Field& out, const char* name) {
    for (std::size_t n = 0; n < old.size(); ++n) {
      const double next = old[n] + c.dt * rate[n];
      if (!std::isfinite(next))
        fail(ErrorKind::non_finite, std::string("non-finite ") + name + " at node " + std::to_string(n) +
                                        " (i=" + std::to_string(n % old.grid().nx) +
                                        ", j=" + std::to_string(n / old.grid().nx) + ") t=" + format_double(s.t));
      if (next < c.floor) {
        out[n] = c.floor;
        ++res.clamp_count;
      } else {
        out[n] = next;
      }
    }
  };
  advance(s.u, rhs.du, res.state.u, "u");
  advance(s.v, rhs.dv, res.state.v, "v");
  advance(s.w, rhs.dw, res.state.w, "w");
  return res;
}

inline StepResult euler_step(const State& s, const Params& p, const StepConfig& c) {
  const long next = std::lround(s.t / c.dt) + 1;
  return euler_step(s, p, c, next);
}

struct StabilityAdvice {
  bool pass = true;
  double bound = 0.0;  // largest dt for unit-diffusivity explicit Euler
  double dt = 0.0;
};

/// Advisory check dt <= 1/2 / (1/dx² + 1/dy²). Chemotaxis and kinetics shift
/// the real limit, so a failure only produces a warning.
inline StabilityAdvice check_stability(const StepConfig& c, const Grid& g) {
  const double bound = 0.5 / (1.0 / (g.dx * g.dx) + 1.0 / (g.dy * g.dy));
  return {c.dt <= bound, bound, c.dt};
}

}  // namespace chemotaxis
