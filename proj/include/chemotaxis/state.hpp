#pragma once

#include "chemotaxis/grid.hpp"

namespace chemotaxis {

/// u: CD4+ T cells, v: CD8+ T cells, w: IFN-gamma, at time t.
struct State {
  Field u;
  Field v;
  Field w;
  double t = 0.0;

  const Grid& grid() const noexcept { return u.grid(); }

  static State uniform(const Grid& g, double u0, double v0, double w0, double t = 0.0) {
    return State{Field(g, u0), Field(g, v0), Field(g, w0), t};
  }

  friend bool operator==(const State&, const State&) = default;
};

}  // namespace chemotaxis
