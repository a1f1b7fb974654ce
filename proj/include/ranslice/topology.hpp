#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ranslice/config.hpp"
#include "ranslice/error.hpp"

namespace ranslice {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Cell {
  int col = 0;
  int row = 0;
  Point center;
};

/// BSs, the location grid and which BS covers each location. Coverage areas
/// are disjoint: each cell belongs to exactly one BS.
struct Topology {
  int bs_count = 0;
  std::vector<std::uint8_t> adjacency;  // bs_count x bs_count, row-major
  std::vector<Point> bs_position;
  int cols = 0;
  int rows = 0;
  std::vector<Cell> cells;
  std::vector<int> bs_of_location;

  int location_count() const { return static_cast<int>(cells.size()); }
  bool valid_location(int loc) const { return loc >= 0 && loc < location_count(); }
  bool adjacent(int b, int c) const { return adjacency[static_cast<std::size_t>(b * bs_count + c)] != 0; }
  int location_at(int col, int row) const { return row * cols + col; }

  void validate() const {
    if (bs_count < 1) throw ConfigError("topology needs at least one BS");
    if (adjacency.size() != static_cast<std::size_t>(bs_count * bs_count))
      throw ConfigError("adjacency matrix has the wrong size");
    for (int b = 0; b < bs_count; ++b) {
      if (adjacent(b, b)) throw ConfigError("a BS cannot neighbour itself");
      for (int c = 0; c < bs_count; ++c)
        if (adjacent(b, c) != adjacent(c, b)) throw ConfigError("adjacency must be symmetric");
    }
    if (bs_of_location.size() != cells.size()) throw ConfigError("every location needs a covering BS");
    for (int b : bs_of_location)
      if (b < 0 || b >= bs_count) throw ConfigError("location covered by an unknown BS");
  }
};

/// Square service region split into cells_per_side^2 locations and
/// bs_per_side^2 BSs, each BS at the centre of its block of cells.
inline Topology make_grid_topology(const TopologySpec& spec) {
  Topology t;
  const int n = spec.cells_per_side;
  const int m = spec.bs_per_side;
  if (n < 1 || m < 1 || m > n) throw ConfigError("need 1 <= bs_per_side <= cells_per_side");
  t.cols = n;
  t.rows = n;
  t.bs_count = m * m;
  const double cell = spec.area_m / n;
  const double block = spec.area_m / m;
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) t.bs_position.push_back({(c + 0.5) * block, (r + 0.5) * block});
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      t.cells.push_back({c, r, {(c + 0.5) * cell, (r + 0.5) * cell}});
      const int bc = c * m / n;
      const int br = r * m / n;
      t.bs_of_location.push_back(br * m + bc);
    }
  }
  t.adjacency.assign(static_cast<std::size_t>(t.bs_count * t.bs_count), 0);
  auto link = [&](int a, int b) {
    if (a < 0 || b < 0 || a >= t.bs_count || b >= t.bs_count || a == b)
      throw ConfigError("invalid BS edge (" + std::to_string(a) + ", " + std::to_string(b) + ")");
    t.adjacency[static_cast<std::size_t>(a * t.bs_count + b)] = 1;
    t.adjacency[static_cast<std::size_t>(b * t.bs_count + a)] = 1;
  };
  if (spec.bs_edges.empty()) {
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        if (c + 1 < m) link(r * m + c, r * m + c + 1);
        if (r + 1 < m) link(r * m + c, (r + 1) * m + c);
      }
    }
  } else {
    for (auto [a, b] : spec.bs_edges) link(a, b);
  }
  t.validate();
  return t;
}

}  // namespace ranslice
