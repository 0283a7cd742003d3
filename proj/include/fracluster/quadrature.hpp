#pragma once

// 1d quadrature: fixed Gauss-Legendre panels and an adaptive driver that
// bisects panels until a GL8/GL16 comparison meets the local budget.
// Integrands are expected to be smooth between the supplied breakpoints;
// all singular behavior must be handled analytically by the caller.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fracluster/core.hpp"

namespace fracluster {

struct GlNode {
  double x;  // abscissa on [-1, 1]
  double w;
};

inline constexpr GlNode gl8_nodes[8] = {
    {-0.96028985649753618, 0.10122853629037669},
    {-0.79666647741362673, 0.22238103445337434},
    {-0.52553240991632899, 0.31370664587788705},
    {-0.18343464249564978, 0.36268378337836177},
    {0.18343464249564978, 0.36268378337836177},
    {0.52553240991632899, 0.31370664587788705},
    {0.79666647741362673, 0.22238103445337434},
    {0.96028985649753618, 0.10122853629037669},
};

inline constexpr GlNode gl16_nodes[16] = {
    {-0.98940093499164994, 0.027152459411754037},
    {-0.9445750230732326, 0.062253523938647706},
    {-0.86563120238783176, 0.095158511682492591},
    {-0.755404408355003, 0.12462897125553403},
    {-0.61787624440264377, 0.14959598881657676},
    {-0.45801677765722737, 0.16915651939500262},
    {-0.28160355077925892, 0.18260341504492361},
    {-0.095012509837637454, 0.18945061045506859},
    {0.095012509837637454, 0.18945061045506859},
    {0.28160355077925892, 0.18260341504492361},
    {0.45801677765722737, 0.16915651939500262},
    {0.61787624440264377, 0.14959598881657676},
    {0.755404408355003, 0.12462897125553403},
    {0.86563120238783176, 0.095158511682492591},
    {0.9445750230732326, 0.062253523938647706},
    {0.98940093499164994, 0.027152459411754037},
};

template <class F>
double gl8(F&& f, double a, double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  NeumaierSum acc;
  for (const GlNode& n : gl8_nodes) acc.add(n.w * f(mid + half * n.x));
  return half * acc.value();
}

template <class F>
double gl16(F&& f, double a, double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  NeumaierSum acc;
  for (const GlNode& n : gl16_nodes) acc.add(n.w * f(mid + half * n.x));
  return half * acc.value();
}

// Adaptive integral of f over [a, b] with absolute tolerance tol_abs.
// Panel error indicator: |GL16 - GL8|. Depth-limited; smooth integrands
// converge long before the limit.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol_abs, int max_depth = 38) {
  struct Panel {
    double a, b, tol;
    int depth;
  };
  if (!(b > a)) return 0.0;
  NeumaierSum total;
  std::vector<Panel> stack;
  stack.push_back({a, b, std::max(tol_abs, 0.0), 0});
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    double coarse = gl8(f, p.a, p.b);
    double fine = gl16(f, p.a, p.b);
    double err = std::abs(fine - coarse);
    if (err <= p.tol || p.depth >= max_depth) {
      total.add(fine);
      continue;
    }
    double mid = 0.5 * (p.a + p.b);
    stack.push_back({p.a, mid, 0.5 * p.tol, p.depth + 1});
    stack.push_back({mid, p.b, 0.5 * p.tol, p.depth + 1});
  }
  return total.value();
}

// Integral over [breaks.front(), breaks.back()] with panel edges at every
// breakpoint. Tolerance is relative to a coarse first pass, with a floor
// so an exactly-zero integral terminates.
template <class F>
double integrate_breaks(F&& f, const std::vector<double>& breaks, double rel_tol,
                        double abs_floor = 1e-300) {
  if (breaks.size() < 2) return 0.0;
  NeumaierSum coarse;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    coarse.add(gl16(f, breaks[i], breaks[i + 1]));
  double scale = std::abs(coarse.value());
  double tol_total = std::max(rel_tol * scale, abs_floor);
  double span = breaks.back() - breaks.front();
  if (!(span > 0.0)) return 0.0;
  NeumaierSum total;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double frac = (breaks[i + 1] - breaks[i]) / span;
    total.add(integrate_adaptive(f, breaks[i], breaks[i + 1], tol_total * frac));
  }
  return total.value();
}

// Deduplicates and sorts breakpoints into [lo, hi], keeping the endpoints.
inline std::vector<double> clamp_breaks(std::vector<double> pts, double lo, double hi) {
  std::vector<double> out;
  out.push_back(lo);
  std::sort(pts.begin(), pts.end());
  for (double p : pts)
    if (p > lo * (1.0 + 1e-14) + 1e-300 && p < hi && p - out.back() > 1e-14 * (1.0 + std::abs(p)))
      out.push_back(p);
  if (hi > out.back()) out.push_back(hi);
  if (out.size() < 2) out = {lo, hi};
  return out;
}

}  // namespace fracluster
