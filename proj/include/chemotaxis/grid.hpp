#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "chemotaxis/error.hpp"

namespace chemotaxis {

/// Uniform vertex-centered grid on [0, lx] x [0, ly]. Node (i, j) sits at
/// (i*dx, j*dy); nodes on the edges are part of the domain.
struct Grid {
  int nx = 0;
  int ny = 0;
  double lx = 0.0;
  double ly = 0.0;
  double dx = 0.0;
  double dy = 0.0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
  }
  double area() const noexcept { return lx * ly; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// dx = lx/(nx-1), dy = ly/(ny-1).
inline Grid make_grid(int nx, int ny, double lx, double ly) {
  require(nx >= 3 && ny >= 3, "grid needs at least 3 nodes per axis");
  require(lx > 0.0 && ly > 0.0 && std::isfinite(lx) && std::isfinite(ly), "grid lengths must be positive");
  return Grid{nx, ny, lx, ly, lx / (nx - 1), ly / (ny - 1)};
}

/// Spacing given, domain inferred as (n-1)*spacing.
inline Grid make_grid_with_spacing(int nx, int ny, double dx, double dy) {
  require(nx >= 3 && ny >= 3, "grid needs at least 3 nodes per axis");
  require(dx > 0.0 && dy > 0.0 && std::isfinite(dx) && std::isfinite(dy), "grid spacing must be positive");
  return Grid{nx, ny, dx * (nx - 1), dy * (ny - 1), dx, dy};
}

/// Scalar nodal values, row-major (x fastest).
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& grid, double value = 0.0) : grid_(grid), values_(grid.size(), value) {}
  Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    require(values_.size() == grid_.size(), "field length does not match grid");
  }

  template <class Fn>
  static Field from_function(const Grid& grid, Fn&& fn) {
    Field f(grid);
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) f(i, j) = fn(i * grid.dx, j * grid.dy);
    return f;
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(int i, int j) noexcept { return values_[grid_.index(i, j)]; }
  double operator()(int i, int j) const noexcept { return values_[grid_.index(i, j)]; }
  double& operator[](std::size_t n) noexcept { return values_[n]; }
  double operator[](std::size_t n) const noexcept { return values_[n]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  /// Nodewise map into a fresh field.
  template <class Fn>
  Field map(Fn&& fn) const {
    Field out(grid_);
    for (std::size_t n = 0; n < values_.size(); ++n) out.values_[n] = fn(values_[n]);
    return out;
  }

  friend bool operator==(const Field&, const Field&) = default;

 private:
  Grid grid_;
  std::vector<double> values_;
};

inline void require_same_grid(const Field& a, const Field& b) {
  require(a.grid() == b.grid(), "fields live on different grids");
}

/// Trapezoidal node weight: 1 inside, 1/2 on edges, 1/4 at corners.
inline double trapezoid_weight(const Grid& g, int i, int j) noexcept {
  double w = 1.0;
  if (i == 0 || i == g.nx - 1) w *= 0.5;
  if (j == 0 || j == g.ny - 1) w *= 0.5;
  return w;
}

/// Discrete integral over the domain. Summation is row-major and sequential,
/// so the result is bit-reproducible.
inline double integrate(const Field& f) {
  const Grid& g = f.grid();
  double sum = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) sum += trapezoid_weight(g, i, j) * f(i, j);
  return sum * g.dx * g.dy;
}

/// Integral of fn(value) without materializing the mapped field.
template <class Fn>
double integrate_map(const Field& f, Fn&& fn) {
  const Grid& g = f.grid();
  double sum = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) sum += trapezoid_weight(g, i, j) * fn(f(i, j));
  return sum * g.dx * g.dy;
}

// ---------------------------------------------------------------------------
// CSV serialization
//
//   # nx=<nx> ny=<ny> lx=<lx> ly=<ly> t=<time>
//   f(0,0),f(1,0),...,f(nx-1,0)
//   ...
// One grid row (fixed j) per line, values printed with 17 significant digits.
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string field_to_csv(const Field& f, double t) {
  const Grid& g = f.grid();
  std::string out = "# nx=" + std::to_string(g.nx) + " ny=" + std::to_string(g.ny) + " lx=" + format_double(g.lx) +
                    " ly=" + format_double(g.ly) + " t=" + format_double(t) + "\n";
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (i) out += ',';
      out += format_double(f(i, j));
    }
    out += '\n';
  }
  return out;
}

inline void write_field_csv(const std::string& path, const Field& f, double t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::io, "cannot open " + path + " for writing");
  os << field_to_csv(f, t);
  if (!os) fail(ErrorKind::io, "write failed: " + path);
}

struct Snapshot {
  Field field;
  double t = 0.0;
};

inline Snapshot field_from_csv(std::istream& is) {
  std::string header;
  std::getline(is, header);
  int nx = 0, ny = 0;
  double lx = 0, ly = 0, t = 0;
  if (std::sscanf(header.c_str(), "# nx=%d ny=%d lx=%lf ly=%lf t=%lf", &nx, &ny, &lx, &ly, &t) != 5)
    fail(ErrorKind::schema_violation, "bad CSV header: " + header);
  Grid g = make_grid(nx, ny, lx, ly);
  std::vector<double> values;
  values.reserve(g.size());
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
  }
  if (values.size() != g.size()) fail(ErrorKind::schema_violation, "CSV body does not match header size");
  return {Field(g, std::move(values)), t};
}

}  // namespace chemotaxis
