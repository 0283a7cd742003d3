#pragma once

// Exact arc bookkeeping on circles. Everything radial in this library
// reduces to measuring, for a circle of radius rho around a point, which
// angular set lands inside a region, a box, or a translated cell. Arc
// sets are kept as sorted disjoint intervals inside [0, 2pi]; wrapping
// arcs are split at 0, so no interval crosses the seam.
//
// Storage is a fixed inline array: arc evaluations sit in the innermost
// quadrature loops and must not touch the heap.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fracluster/core.hpp"
#include "fracluster/geometry.hpp"

namespace fracluster {

struct Arc {
  double lo, hi;
};

struct ArcSet {
  static constexpr int cap = 32;
  int n = 0;
  std::array<Arc, cap> iv;

  void push(double lo, double hi) {
    if (!(hi > lo)) return;
    if (n >= cap) throw std::length_error("ArcSet: arc count exceeds capacity");
    iv[n++] = {lo, hi};
  }

  static ArcSet none() { return {}; }

  static ArcSet full() {
    ArcSet a;
    a.push(0.0, two_pi);
    return a;
  }

  // arc starting at angle `from` of the given ccw length
  static ArcSet of(double from, double len) {
    ArcSet a;
    if (!(len > 0.0)) return a;
    if (len >= two_pi) return full();
    double lo = wrap_angle(from);
    double hi = lo + len;
    if (hi <= two_pi) {
      a.push(lo, hi);
    } else {
      a.push(0.0, hi - two_pi);
      a.push(lo, two_pi);
    }
    return a;
  }

  // {theta : cos(theta - phase) >= c}
  static ArcSet cos_ge(double c, double phase) {
    if (c <= -1.0) return full();
    if (c >= 1.0) return none();
    double t = std::acos(c);
    return of(phase - t, 2.0 * t);
  }

  // {theta : cos(theta - phase) <= c}
  static ArcSet cos_le(double c, double phase) {
    if (c >= 1.0) return full();
    if (c <= -1.0) return none();
    double t = std::acos(c);
    return of(phase + t, two_pi - 2.0 * t);
  }

  static ArcSet sin_ge(double c) { return cos_ge(c, 0.5 * pi); }
  static ArcSet sin_le(double c) { return cos_le(c, 0.5 * pi); }

  bool is_empty() const { return n == 0; }

  double measure() const {
    double m = 0.0;
    for (int i = 0; i < n; ++i) m += iv[i].hi - iv[i].lo;
    return m;
  }

  ArcSet intersect(const ArcSet& o) const {
    ArcSet r;
    int i = 0, j = 0;
    while (i < n && j < o.n) {
      double lo = std::max(iv[i].lo, o.iv[j].lo);
      double hi = std::min(iv[i].hi, o.iv[j].hi);
      if (hi > lo) r.push(lo, hi);
      if (iv[i].hi < o.iv[j].hi)
        ++i;
      else
        ++j;
    }
    return r;
  }

  ArcSet complement() const {
    ArcSet r;
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
      if (iv[i].lo > prev) r.push(prev, iv[i].lo);
      prev = std::max(prev, iv[i].hi);
    }
    if (prev < two_pi) r.push(prev, two_pi);
    return r;
  }

  ArcSet subtract(const ArcSet& o) const { return intersect(o.complement()); }

  ArcSet unite(const ArcSet& o) const {
    return complement().intersect(o.complement()).complement();
  }
};

// ---- circle sections of the analytic regions -------------------------------

// arcs of {theta : x + rho e^{i theta} in half-plane}
inline ArcSet circle_arcs(const HalfPlane& hp, Vec2 x, double rho) {
  // n.x + rho cos(theta - phase) > b
  double c = (hp.b - dot(hp.n, x)) / rho;
  return ArcSet::cos_ge(c, std::atan2(hp.n.y, hp.n.x));
}

namespace detail {
// {theta : n.(x - v + rho e^{i theta}) >= 0} for a unit normal n
inline ArcSet ray_side_arcs(Vec2 n, Vec2 v, Vec2 x, double rho) {
  double c = dot(n, v - x) / rho;
  return ArcSet::cos_ge(c, std::atan2(n.y, n.x));
}

inline ArcSet convex_sector_arcs(Vec2 v, double a0, double a1, Vec2 x, double rho) {
  // opening <= pi: intersection of the two edge half-planes through v
  Vec2 n0{-std::sin(a0), std::cos(a0)};  // left of the start ray
  Vec2 n1{std::sin(a1), -std::cos(a1)};  // right of the end ray
  return ray_side_arcs(n0, v, x, rho).intersect(ray_side_arcs(n1, v, x, rho));
}
}  // namespace detail

inline ArcSet circle_arcs(const Sector& s, Vec2 x, double rho) {
  double a1 = s.a0 + s.opening;
  if (s.opening <= pi) return detail::convex_sector_arcs(s.v, s.a0, a1, x, rho);
  // reflex sector: complement of the complementary convex sector
  return detail::convex_sector_arcs(s.v, a1, s.a0 + two_pi, x, rho).complement();
}

inline ArcSet circle_arcs(const PolygonRegion& poly, Vec2 x, double rho) {
  // cut the circle where it crosses polygon edges, then classify one point
  // per sub-arc. Between crossings the inside indicator is constant.
  std::array<double, 2 * ArcSet::cap> cuts;
  int nc = 0;
  std::size_t n = poly.v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    Vec2 u = poly.v[j], e = poly.v[i] - poly.v[j];
    Vec2 w = u - x;
    double A = norm2(e), B = 2.0 * dot(w, e), C = norm2(w) - rho * rho;
    if (A <= 0.0) continue;
    double disc = B * B - 4.0 * A * C;
    if (disc <= 0.0) continue;
    double sd = std::sqrt(disc);
    for (double t : {(-B - sd) / (2.0 * A), (-B + sd) / (2.0 * A)}) {
      if (t < 0.0 || t > 1.0) continue;
      if (nc >= static_cast<int>(cuts.size()))
        throw std::length_error("circle_arcs: too many polygon crossings");
      Vec2 p = u + t * e - x;
      cuts[nc++] = wrap_angle(std::atan2(p.y, p.x));
    }
  }
  auto probe = [&](double th) {
    Vec2 p{x.x + rho * std::cos(th), x.y + rho * std::sin(th)};
    return contains(poly, p);
  };
  if (nc == 0) return probe(0.7528) ? ArcSet::full() : ArcSet::none();
  std::sort(cuts.begin(), cuts.begin() + nc);
  ArcSet r;
  for (int i = 0; i < nc; ++i) {
    double lo = cuts[i];
    double hi = (i + 1 < nc) ? cuts[i + 1] : cuts[0] + two_pi;
    if (!(hi > lo)) continue;
    if (probe(0.5 * (lo + hi))) r = r.unite(ArcSet::of(lo, hi - lo));
  }
  return r;
}

inline ArcSet circle_arcs(const AnalyticRegion& r, Vec2 x, double rho) {
  return std::visit([&](const auto& g) { return circle_arcs(g, x, rho); }, r);
}

// arcs landing strictly inside the box
inline ArcSet box_arcs(const Box& b, Vec2 x, double rho) {
  ArcSet a = ArcSet::cos_ge((b.lo.x - x.x) / rho, 0.0);
  a = a.intersect(ArcSet::cos_ge((x.x - b.hi.x) / rho, pi));
  a = a.intersect(ArcSet::cos_ge((b.lo.y - x.y) / rho, 0.5 * pi));
  return a.intersect(ArcSet::cos_ge((x.y - b.hi.y) / rho, 1.5 * pi));
}

// ---- radii where the arc topology can change -------------------------------

inline void critical_radii(const HalfPlane& hp, Vec2 x, std::vector<double>& out) {
  out.push_back(std::abs(dot(hp.n, x) - hp.b));
}

inline void critical_radii(const Sector& s, Vec2 x, std::vector<double>& out) {
  Vec2 w = x - s.v;
  out.push_back(norm(w));
  for (double a : {s.a0, s.a0 + s.opening}) {
    Vec2 d{std::cos(a), std::sin(a)};
    if (dot(w, d) > 0.0) out.push_back(std::abs(cross(d, w)));
  }
}

inline void critical_radii(const PolygonRegion& poly, Vec2 x, std::vector<double>& out) {
  std::size_t n = poly.v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    out.push_back(norm(x - poly.v[i]));
    Vec2 u = poly.v[j], e = poly.v[i] - poly.v[j];
    double A = norm2(e);
    if (A <= 0.0) continue;
    double t = dot(x - u, e) / A;
    if (t > 0.0 && t < 1.0) out.push_back(norm(x - (u + t * e)));
  }
}

inline void critical_radii(const AnalyticRegion& r, Vec2 x, std::vector<double>& out) {
  std::visit([&](const auto& g) { critical_radii(g, x, out); }, r);
}

inline void critical_radii(const Box& b, Vec2 x, std::vector<double>& out) {
  out.push_back(std::abs(x.x - b.lo.x));
  out.push_back(std::abs(b.hi.x - x.x));
  out.push_back(std::abs(x.y - b.lo.y));
  out.push_back(std::abs(b.hi.y - x.y));
  out.push_back(norm(x - b.lo));
  out.push_back(norm(x - b.hi));
  out.push_back(norm(x - Vec2{b.lo.x, b.hi.y}));
  out.push_back(norm(x - Vec2{b.hi.x, b.lo.y}));
}

// limit of the arc measure as rho -> infinity
inline double mu_infinity(const AnalyticRegion& r) {
  if (std::holds_alternative<HalfPlane>(r)) return pi;
  if (const Sector* s = std::get_if<Sector>(&r)) return s->opening;
  return 0.0;  // polygon is bounded
}

}  // namespace fracluster
