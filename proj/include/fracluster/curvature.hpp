#pragma once

// Pointwise fractional curvature of an analytic region E at a boundary
// point x:
//
//   H_s(x, E) = P.V. int (ind_Ec - ind_E)(y) |x - y|^(-2-s) dy
//             = int_0^inf rho^(-1-s) (2 pi - 2 mu_E(x, rho)) drho
//
// where mu_E(x, rho) is the arc measure of E on the circle of radius rho
// about x. The principal value is realised by excising a disk of radius
// eps and removing the eps -> 0 limit with a small extrapolation ladder;
// for x on a straight piece of boundary the integrand vanishes near 0 and
// the ladder is exact at every rung. Positive values mean E is locally
// "less than a half-plane" at x (e.g. a convex corner seen from outside).

#include <array>
#include <cmath>
#include <vector>

#include "fracluster/arcs.hpp"
#include "fracluster/core.hpp"
#include "fracluster/geometry.hpp"
#include "fracluster/kernel.hpp"

namespace fracluster {

struct CurvatureOptions {
  double eps0 = 1e-4;     // largest excision radius of the ladder
  double r_cut = 1e300;   // outer truncation; >= 1e290 means none
  double rel_tol = 1e-9;  // radial quadrature tolerance
};

struct CurvatureResult {
  double value = 0.0;               // extrapolated curvature
  std::array<double, 3> ladder{};   // H(eps0), H(eps0/2), H(eps0/4)
  bool extrapolated = false;        // false when the Aitken step was rejected
};

inline CurvatureResult fractional_curvature(const AnalyticRegion& region, Vec2 x, double s,
                                            CurvatureOptions opt = {}) {
  std::vector<double> crit;
  critical_radii(region, x, crit);
  double far_scale = 1.0;
  for (double r : crit) far_scale = std::max(far_scale, r);
  const double g_inf = two_pi - 2.0 * mu_infinity(region);
  auto g = [&](double rho) { return two_pi - 2.0 * circle_arcs(region, x, rho).measure(); };

  CurvatureResult out;
  double eps = opt.eps0;
  for (int i = 0; i < 3; ++i, eps *= 0.5)
    out.ladder[i] = radial_integral(g, s, eps, opt.r_cut, crit, g_inf, far_scale, opt.rel_tol);

  const double h0 = out.ladder[0], h1 = out.ladder[1], h2 = out.ladder[2];
  double scale = std::max({std::fabs(h0), std::fabs(h1), std::fabs(h2), 1.0});
  double denom = h2 - 2.0 * h1 + h0;
  out.value = h2;
  if (std::fabs(denom) > 1e-13 * scale) {
    double extrap = h2 - (h2 - h1) * (h2 - h1) / denom;
    // accept only contractive steps; a diverging ladder means the point
    // sits on a genuinely singular feature and h2 is the honest answer
    if (std::fabs(extrap - h2) <= 4.0 * std::fabs(h2 - h1)) {
      out.value = extrap;
      out.extrapolated = true;
    }
  } else {
    out.extrapolated = true;  // ladder already flat
  }
  return out;
}

}  // namespace fracluster
