#pragma once

// Interaction integrals of the kernel |x - y|^{-2-s}, 0 < s < 1.
//
// Cell pairs reduce exactly to a 1d radial integral: writing the double
// integral as a correlation, the angular factor is the integral of a
// product of two tent functions over the arcs where the shifted circle
// meets the support square. That factor has a closed form per arc, and
// for touching cells it equals c1*rho + c2*rho^2 exactly below the first
// critical radius, so the kernel singularity integrates analytically.
//
// Cell-region couplings integrate an exact per-point radial profile over
// the cell; box-contact cells grade the outer rule toward the contact
// edge and close the t^{-s} edge profile with a fitted two-term model.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fracluster/arcs.hpp"
#include "fracluster/core.hpp"
#include "fracluster/geometry.hpp"
#include "fracluster/quadrature.hpp"

namespace fracluster {

// Angular integral of T(qx) T(qy) over the arcs where q = rho e^{i th} - p
// stays inside the open square (-h, h)^2, with tent T(t) = h - |t|.
// Requires px, py >= 0 (symmetry lets callers fold signs).
inline double tent_overlap_arc(double px, double py, double h, double rho) {
  double total = 0.0;
  for (int sx = 1; sx >= -1; sx -= 2) {
    ArcSet ax = (sx > 0)
                    ? ArcSet::cos_ge(px / rho, 0.0).intersect(ArcSet::cos_le((px + h) / rho, 0.0))
                    : ArcSet::cos_ge((px - h) / rho, 0.0).intersect(ArcSet::cos_le(px / rho, 0.0));
    if (ax.is_empty()) continue;
    for (int sy = 1; sy >= -1; sy -= 2) {
      ArcSet piece = (sy > 0) ? ax.intersect(ArcSet::sin_ge(py / rho).intersect(
                                    ArcSet::sin_le((py + h) / rho)))
                              : ax.intersect(ArcSet::sin_ge((py - h) / rho)
                                                 .intersect(ArcSet::sin_le(py / rho)));
      if (piece.is_empty()) continue;
      // On this piece T(qx) = a + b cos th, T(qy) = c + d sin th.
      double a = h + sx * px, b = -sx * rho;
      double c = h + sy * py, d = -sy * rho;
      auto anti = [&](double t) {
        double st = std::sin(t);
        return a * c * t - a * d * std::cos(t) + b * c * st + 0.5 * b * d * st * st;
      };
      for (int i = 0; i < piece.n; ++i) total += anti(piece.iv[i].hi) - anti(piece.iv[i].lo);
    }
  }
  return total;
}

// Interaction of two axis-aligned square cells of side h with center offset
// (dx, dy). quad_tol is a relative error budget: separated pairs use a
// midpoint value with the leading Laplacian correction when its error
// estimate fits the budget, everything else runs the exact radial path.
inline double j_cells(double dx, double dy, double h, double s, double quad_tol = 1e-6) {
  double ux = std::abs(dx) / h, uy = std::abs(dy) / h;
  if (ux < 1.0 - 1e-9 && uy < 1.0 - 1e-9)
    throw std::invalid_argument("j_cells: cells overlap, interaction diverges");
  double d2 = ux * ux + uy * uy;
  double p = 2.0 + s;
  if (d2 >= 16.0 && 0.5 / (d2 * d2) <= quad_tol) {
    // J ~ h^4 [k(delta) + h^2/12 lap k(delta)], lap r^-p = p^2 r^-p-2
    return std::pow(h, 2.0 - s) * std::pow(d2, -0.5 * p) * (1.0 + p * p / (12.0 * d2));
  }

  std::vector<double> crit;
  crit.reserve(15);
  for (double lx : {ux - 1.0, ux, ux + 1.0}) crit.push_back(std::abs(lx));
  for (double ly : {uy - 1.0, uy, uy + 1.0}) crit.push_back(std::abs(ly));
  for (double ax : {-1.0, 0.0, 1.0})
    for (double ay : {-1.0, 0.0, 1.0}) crit.push_back(std::hypot(ux + ax, uy + ay));
  double rho_min = std::hypot(std::max(ux - 1.0, 0.0), std::max(uy - 1.0, 0.0));
  double rho_max = std::hypot(ux + 1.0, uy + 1.0);

  auto f = [&](double rho) { return std::pow(rho, -1.0 - s) * tent_overlap_arc(ux, uy, 1.0, rho); };
  double tol = std::clamp(quad_tol, 1e-12, 1e-10);

  double val = 0.0;
  if (rho_min > 0.0) {
    val = integrate_breaks(f, clamp_breaks(crit, rho_min, rho_max), tol);
  } else {
    // touching pair: below the first critical radius every cut angle is
    // fixed, so the arc factor is exactly c1*rho + c2*rho^2; verify the
    // fit at a third radius and shrink if the check ever fails
    double rho1 = rho_max;
    for (double cr : crit)
      if (cr > 1e-12 && cr < rho1) rho1 = cr;
    double inner = 0.0;
    for (int tries = 0;; ++tries) {
      double r = rho1 / 3.0;
      double a1 = tent_overlap_arc(ux, uy, 1.0, r);
      double a2 = tent_overlap_arc(ux, uy, 1.0, 2.0 * r);
      double c2r2 = 0.5 * (a2 - 2.0 * a1);  // c2 * r^2
      double c1r = a1 - c2r2;               // c1 * r
      double am = tent_overlap_arc(ux, uy, 1.0, 1.5 * r);
      double scale = std::max({std::abs(a1), std::abs(a2), 1e-300});
      if (std::abs(am - (1.5 * c1r + 2.25 * c2r2)) <= 1e-9 * scale || tries >= 8) {
        double c1 = c1r / r, c2 = c2r2 / (r * r);
        inner = c1 * std::pow(rho1, 1.0 - s) / (1.0 - s) +
                c2 * std::pow(rho1, 2.0 - s) / (2.0 - s);
        break;
      }
      rho1 *= 0.5;
    }
    val = inner + integrate_breaks(f, clamp_breaks(crit, rho1, rho_max), tol);
  }
  return std::pow(h, 2.0 - s) * val;
}

// Upper bound for the interaction of mass m with everything beyond radius R.
inline double point_tail_bound(double m, double R, double s) {
  return m * (two_pi / s) * std::pow(R, -s);
}

// C_s = sqrt(pi) Gamma((1+s)/2) / Gamma(1 + s/2). A point at distance t
// from a half-plane sees kernel mass (C_s / s) t^{-s}, and (1 - s) times
// the coupling of a unit-length interface tends to C_1 = 2 as s -> 1.
inline double cs_constant(double s) {
  return std::sqrt(pi) * std::tgamma(0.5 * (1.0 + s)) / std::tgamma(1.0 + 0.5 * s);
}

// Integral of rho^{-1-s} g(rho) over [lo, r_cut]. g must be piecewise
// smooth between the supplied breakpoints and, past far_scale, behave like
// g_inf + m1/rho + m2/rho^2 + O(rho^-3); the far part uses that expansion
// with m1, m2 fitted from two samples, so huge or infinite r_cut costs
// nothing extra. far_scale should dominate every geometric feature radius.
template <class G>
double radial_integral(G&& g, double s, double lo, double r_cut, std::vector<double> breaks,
                       double g_inf, double far_scale, double rel_tol) {
  auto f = [&](double rho) { return std::pow(rho, -1.0 - s) * g(rho); };
  if (!(r_cut > lo)) return 0.0;
  double L = 100.0 * std::max({far_scale, lo, 1e-30});

  auto pad_geometric = [](std::vector<double>& b, double from, double to) {
    for (double q = 4.0 * std::max(from, to * 1e-8); q < to; q *= 4.0) b.push_back(q);
  };

  if (r_cut <= 2.0 * L) {
    double top = 0.0;
    for (double c : breaks)
      if (c < r_cut) top = std::max(top, c);
    pad_geometric(breaks, std::max(top, lo), r_cut);
    return integrate_breaks(f, clamp_breaks(breaks, lo, r_cut), rel_tol);
  }

  double top = 0.0;
  for (double c : breaks)
    if (c < L) top = std::max(top, c);
  pad_geometric(breaks, std::max(top, lo), L);
  double near = integrate_breaks(f, clamp_breaks(breaks, lo, L), rel_tol);

  // tail: fit g ~ g_inf + m1/rho + m2/rho^2 from samples at L and 2L
  double da = g(L) - g_inf, db = g(2.0 * L) - g_inf;
  double x1 = 4.0 * db - da;        // m1 / L
  double x2 = da - x1;              // m2 / L^2
  double m1 = x1 * L, m2 = x2 * L * L;
  auto T = [&](double q) {
    double up = (r_cut >= 1e290) ? 0.0 : std::pow(r_cut, -q);
    return (std::pow(L, -q) - up) / q;
  };
  return near + g_inf * T(s) + m1 * T(1.0 + s) + m2 * T(2.0 + s);
}

struct RegionCoupling {
  double value = 0.0;       // interaction within r_cut
  double tail_bound = 0.0;  // bound for the part beyond r_cut
};

namespace detail {

struct AxisSeg {
  double a, b;  // offsets within [0, h] along the axis
  int sing;     // -1 none, 0 singular toward a, 1 singular toward b
};

// Geometric partition of [0, h]: graded toward touched ends, one segment
// otherwise. The innermost strip at a touched end is flagged for the
// model-based rule.
inline std::vector<AxisSeg> axis_partition(double h, bool touch_lo, bool touch_hi) {
  std::vector<AxisSeg> segs;
  if (!touch_lo && !touch_hi) {
    segs.push_back({0.0, h, -1});
    return segs;
  }
  double mid_lo = touch_lo ? 0.5 * h : 0.0;
  double mid_hi = touch_hi ? 0.5 * h : h;
  if (touch_lo) {
    double w = h / 32.0;
    segs.push_back({0.0, w, 0});
    for (; w < 0.49 * h; w *= 2.0) segs.push_back({w, std::min(2.0 * w, 0.5 * h), -1});
  }
  if (mid_hi > mid_lo) segs.push_back({mid_lo, mid_hi, -1});
  if (touch_hi) {
    double w = h / 32.0;
    std::vector<AxisSeg> tailv;
    tailv.push_back({h - w, h, 1});
    for (; w < 0.49 * h; w *= 2.0) tailv.push_back({h - std::min(2.0 * w, 0.5 * h), h - w, -1});
    segs.insert(segs.end(), tailv.rbegin(), tailv.rend());
  }
  return segs;
}

}  // namespace detail

// Interaction of grid cell `cell` with (region \ box), truncated at radius
// r_cut around each cell point; the truncated remainder is reported as a
// bound. rel_tol is the relative accuracy target for separated geometry;
// box-contact cells degrade gracefully (edge profile model, see header
// comment).
inline RegionCoupling j_cell_region(const Grid& g, int cell, const AnalyticRegion& region,
                                    double s, double r_cut, double rel_tol = 1e-6) {
  const Box& box = g.box;
  double h = g.h;
  Vec2 c0 = g.center(cell);
  Vec2 lo{c0.x - 0.5 * h, c0.y - 0.5 * h};

  double inner_tol = std::clamp(0.1 * rel_tol, 1e-12, 1e-5);

  auto profile = [&](Vec2 x) {
    std::vector<double> crit;
    crit.reserve(24);
    critical_radii(region, x, crit);
    critical_radii(box, x, crit);
    double far_scale = h;
    for (double cr : crit) far_scale = std::max(far_scale, cr);
    auto mu = [&](double rho) {
      return circle_arcs(region, x, rho).subtract(box_arcs(box, x, rho)).measure();
    };
    return radial_integral(mu, s, 1e-12 * h, r_cut, std::move(crit), mu_infinity(region),
                           far_scale, inner_tol);
  };

  RegionCoupling out;
  out.tail_bound = (r_cut >= 1e290) ? 0.0 : point_tail_bound(h * h, r_cut, s);

  // distance from the cell to the box boundary bounds the distance to
  // region \ box from below
  double d_box = std::min(std::min(lo.x - box.lo.x, box.hi.x - (lo.x + h)),
                          std::min(lo.y - box.lo.y, box.hi.y - (lo.y + h)));
  d_box = std::max(d_box, 0.0);

  if (d_box >= 4.0 * h && 0.5 * std::pow(h / d_box, 4.0) <= rel_tol) {
    // far cell: treat it as a point mass with the leading cell-average
    // correction folded into the radial weight
    std::vector<double> crit;
    critical_radii(region, c0, crit);
    critical_radii(box, c0, crit);
    double far_scale = h;
    for (double cr : crit) far_scale = std::max(far_scale, cr);
    double corr = sq(2.0 + s) * h * h / 24.0;
    auto gmu = [&](double rho) {
      double m = circle_arcs(region, c0, rho).subtract(box_arcs(box, c0, rho)).measure();
      return m * (1.0 + corr / (rho * rho));
    };
    out.value = h * h * radial_integral(gmu, s, 1e-12 * h, r_cut, std::move(crit),
                                        mu_infinity(region), far_scale, inner_tol);
    return out;
  }

  // which box edges does the cell touch, with region mass right across?
  double eps = 1e-12 * (1.0 + std::abs(box.hi.x) + std::abs(box.hi.y));
  auto region_behind = [&](int axis, double edge_coord, double span_lo, double span_hi,
                           double outward) {
    for (double f : {0.05, 0.275, 0.5, 0.725, 0.95})
      for (double dist : {1e-6 * h, 1e-3 * h, 0.02 * h, 0.15 * h, 0.6 * h}) {
        double along = span_lo + f * (span_hi - span_lo);
        Vec2 p = (axis == 0) ? Vec2{edge_coord + outward * dist, along}
                             : Vec2{along, edge_coord + outward * dist};
        if (!box.contains(p) && contains(region, p)) return true;
      }
    return false;
  };
  bool tx_lo = lo.x - box.lo.x <= eps && region_behind(0, box.lo.x, lo.y, lo.y + h, -1.0);
  bool tx_hi = box.hi.x - (lo.x + h) <= eps && region_behind(0, box.hi.x, lo.y, lo.y + h, 1.0);
  bool ty_lo = lo.y - box.lo.y <= eps && region_behind(1, box.lo.y, lo.x, lo.x + h, -1.0);
  bool ty_hi = box.hi.y - (lo.y + h) <= eps && region_behind(1, box.hi.y, lo.x, lo.x + h, 1.0);

  std::vector<detail::AxisSeg> xs = detail::axis_partition(h, tx_lo, tx_hi);
  std::vector<detail::AxisSeg> ys = detail::axis_partition(h, ty_lo, ty_hi);

  // integral of the edge model beta * t^-s + gamma over a strip of width w,
  // with samples at w/3 and 2w/3 from the singular end
  auto strip_line = [&](double t1v, double t2v, double w) {
    double t1 = w / 3.0, t2 = 2.0 * w / 3.0;
    double p1 = std::pow(t1, -s), p2 = std::pow(t2, -s);
    double beta = (t1v - t2v) / (p1 - p2);
    double gamma = t1v - beta * p1;
    return beta * std::pow(w, 1.0 - s) / (1.0 - s) + gamma * w;
  };

  NeumaierSum acc;
  for (const auto& sx : xs)
    for (const auto& sy : ys) {
      bool mx = sx.sing >= 0, my = sy.sing >= 0;
      if (mx && !my) {
        double w = sx.b - sx.a;
        double ymid = 0.5 * (sy.a + sy.b), yhalf = 0.5 * (sy.b - sy.a);
        for (const GlNode& nyq : gl8_nodes) {
          double y = lo.y + ymid + yhalf * nyq.x;
          auto at = [&](double t) {
            double x = (sx.sing == 0) ? lo.x + sx.a + t : lo.x + sx.b - t;
            return profile({x, y});
          };
          acc.add(nyq.w * yhalf * strip_line(at(w / 3.0), at(2.0 * w / 3.0), w));
        }
      } else if (my && !mx) {
        double w = sy.b - sy.a;
        double xmid = 0.5 * (sx.a + sx.b), xhalf = 0.5 * (sx.b - sx.a);
        for (const GlNode& nxq : gl8_nodes) {
          double x = lo.x + xmid + xhalf * nxq.x;
          auto at = [&](double t) {
            double y = (sy.sing == 0) ? lo.y + sy.a + t : lo.y + sy.b - t;
            return profile({x, y});
          };
          acc.add(nxq.w * xhalf * strip_line(at(w / 3.0), at(2.0 * w / 3.0), w));
        }
      } else {
        // plain tensor rule; also used for the tiny corner strips where
        // both axes are singular
        double xmid = 0.5 * (sx.a + sx.b), xhalf = 0.5 * (sx.b - sx.a);
        double ymid = 0.5 * (sy.a + sy.b), yhalf = 0.5 * (sy.b - sy.a);
        for (const GlNode& nxq : gl8_nodes)
          for (const GlNode& nyq : gl8_nodes) {
            Vec2 x{lo.x + xmid + xhalf * nxq.x, lo.y + ymid + yhalf * nyq.x};
            acc.add(nxq.w * nyq.w * xhalf * yhalf * profile(x));
          }
      }
    }
  out.value = acc.value();
  return out;
}

}  // namespace fracluster
