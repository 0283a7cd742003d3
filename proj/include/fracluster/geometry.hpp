#pragma once

// Planar geometry for the discrete model: analytic regions (half-plane,
// sector, polygon), the computational box with its square-cell grid, and
// exterior data given as a labeled partition of the plane.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fracluster/core.hpp"

namespace fracluster {

inline double wrap_angle(double a) {
  double w = std::fmod(a, two_pi);
  if (w < 0.0) w += two_pi;
  return w;
}

// Open half-plane {x : n.x > b}. n is stored normalized.
struct HalfPlane {
  Vec2 n{1.0, 0.0};
  double b = 0.0;

  HalfPlane() = default;
  HalfPlane(Vec2 normal, double offset) {
    double len = norm(normal);
    if (!(len > 0.0)) throw std::invalid_argument("half_plane: zero normal");
    n = {normal.x / len, normal.y / len};
    b = offset / len;
  }
};

// Infinite sector with vertex v spanning angles [a0, a0+opening] ccw,
// opening in (0, 2pi).
struct Sector {
  Vec2 v{0.0, 0.0};
  double a0 = 0.0;
  double opening = pi;

  Sector() = default;
  Sector(Vec2 vertex, double start, double end) : v(vertex) {
    a0 = wrap_angle(start);
    opening = wrap_angle(end - start);
    if (opening == 0.0) opening = two_pi;  // full turn given as equal angles
    if (!(opening > 0.0 && opening < two_pi)) throw std::invalid_argument("sector: bad opening");
  }
};

// Simple polygon, vertices in order (either orientation), no self-crossing.
struct PolygonRegion {
  std::vector<Vec2> v;

  explicit PolygonRegion(std::vector<Vec2> verts) : v(std::move(verts)) {
    if (v.size() < 3) throw std::invalid_argument("polygon: needs >= 3 vertices");
  }
};

using AnalyticRegion = std::variant<HalfPlane, Sector, PolygonRegion>;

inline bool contains(const HalfPlane& h, Vec2 p) { return dot(h.n, p) > h.b; }

inline bool contains(const Sector& s, Vec2 p) {
  Vec2 d = p - s.v;
  if (d.x == 0.0 && d.y == 0.0) return true;
  return wrap_angle(std::atan2(d.y, d.x) - s.a0) <= s.opening;
}

inline bool contains(const PolygonRegion& poly, Vec2 p) {
  // even-odd crossing count
  bool inside = false;
  std::size_t n = poly.v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    Vec2 a = poly.v[j], b = poly.v[i];
    if ((b.y > p.y) != (a.y > p.y)) {
      double t = (p.y - b.y) / (a.y - b.y);
      if (p.x < b.x + t * (a.x - b.x)) inside = !inside;
    }
  }
  return inside;
}

inline bool contains(const AnalyticRegion& r, Vec2 p) {
  return std::visit([&](const auto& g) { return contains(g, p); }, r);
}

// Axis-aligned box, lo < hi componentwise.
struct Box {
  Vec2 lo, hi;

  bool contains(Vec2 p) const {
    return p.x > lo.x && p.x < hi.x && p.y > lo.y && p.y < hi.y;
  }
  Vec2 center() const { return {0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)}; }
  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
};

// Where the constrained-cell set lives: everything, a disk, or one
// analytic region.
struct WholePlane {};
struct Disk {
  Vec2 c;
  double r = 1.0;
};
using OmegaShape = std::variant<WholePlane, Disk, AnalyticRegion>;

inline bool omega_contains(const OmegaShape& o, Vec2 p) {
  if (std::holds_alternative<WholePlane>(o)) return true;
  if (const Disk* d = std::get_if<Disk>(&o)) return norm2(p - d->c) < d->r * d->r;
  return contains(std::get<AnalyticRegion>(o), p);
}

// Square-cell grid covering a box. Cells are indexed (i, j) with i along x,
// linearized as i + nx*j. interior[c] marks cells whose center lies in
// omega; the rest are frozen to the exterior datum.
struct Grid {
  Box box;
  int nx = 0, ny = 0;
  double h = 0.0;
  std::vector<std::uint8_t> interior;

  int idx(int i, int j) const { return i + nx * j; }
  int cell_count() const { return nx * ny; }
  Vec2 center(int c) const {
    int i = c % nx, j = c / nx;
    return {box.lo.x + h * (i + 0.5), box.lo.y + h * (j + 0.5)};
  }
};

// n cells along x; the cell size must tile the box height as well
// (within a relative 1e-9), so only aspect-compatible boxes are accepted.
inline Grid build_grid(const Box& box, int n, const OmegaShape& omega) {
  if (n < 1) throw std::invalid_argument("build_grid: n must be positive");
  if (!(box.hi.x > box.lo.x && box.hi.y > box.lo.y))
    throw std::invalid_argument("build_grid: empty box");
  Grid g;
  g.box = box;
  g.nx = n;
  g.h = box.width() / n;
  double fy = box.height() / g.h;
  g.ny = static_cast<int>(std::lround(fy));
  if (g.ny < 1 || std::abs(fy - g.ny) > 1e-9 * fy)
    throw std::invalid_argument("build_grid: box height is not a multiple of the cell size");
  g.interior.resize(static_cast<std::size_t>(g.nx) * g.ny);
  for (int c = 0; c < g.cell_count(); ++c)
    g.interior[static_cast<std::size_t>(c)] = omega_contains(omega, g.center(c)) ? 1 : 0;
  return g;
}

// Exterior data: k analytic regions covering the plane, one per phase.
// Overlaps are resolved by first match; this only matters on shared
// boundaries, which carry no area.
struct Datum {
  std::vector<AnalyticRegion> regions;

  int phase_count() const { return static_cast<int>(regions.size()); }
};

// First region containing p; points caught by no region (only possible on
// boundary lines with strict half-plane containment) fall to the last one.
inline int datum_phase(const Datum& d, Vec2 p) {
  for (std::size_t i = 0; i < d.regions.size(); ++i)
    if (contains(d.regions[i], p)) return static_cast<int>(i);
  return static_cast<int>(d.regions.size()) - 1;
}

// Two phases split by the line n.x = b.
inline Datum half_plane_datum(Vec2 n, double b) {
  Datum d;
  d.regions.emplace_back(HalfPlane(n, b));
  d.regions.emplace_back(HalfPlane({-n.x, -n.y}, -b));
  return d;
}

// Three congruent sectors around the origin, phase i bisected by the
// direction 2*pi*i/3. The max-dot rule over these directions yields the
// same partition.
inline Datum steiner_datum() {
  Datum d;
  for (int i = 0; i < 3; ++i) {
    double mid = two_pi * i / 3.0;
    d.regions.emplace_back(Sector({0.0, 0.0}, mid - pi / 3.0, mid + pi / 3.0));
  }
  return d;
}

// Phase of every cell center (frozen cells included).
inline std::vector<std::uint8_t> rasterize_datum(const Grid& g, const Datum& d) {
  if (d.phase_count() < 2 || d.phase_count() > 255)
    throw std::invalid_argument("datum: phase count out of range");
  std::vector<std::uint8_t> lab(static_cast<std::size_t>(g.cell_count()));
  int fallback = 0;
  for (int c = 0; c < g.cell_count(); ++c) {
    Vec2 p = g.center(c);
    int ph = datum_phase(d, p);
    if (!contains(d.regions[static_cast<std::size_t>(ph)], p)) ++fallback;
    lab[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(ph);
  }
  // a datum that misses many cell centers does not cover the plane
  if (fallback > g.cell_count() / 100 + 2)
    throw std::invalid_argument("datum: regions do not cover the domain");
  return lab;
}

}  // namespace fracluster
