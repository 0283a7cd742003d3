#pragma once

// Junction angle theory. wedge_potential(alpha, s) is the kernel mass of a
// symmetric wedge of half-opening alpha seen from a point at unit distance
// on its axis, pointing away:
//
//   wedge_potential(alpha) = (2/s) (sin alpha)^(-s) * int_0^alpha sin^s
//
// It is smooth, strictly increasing, 0 at 0, and blows up like
// (pi - alpha)^(-s) at pi. A weighted triple junction is balanced when
// c_i * wedge_potential(pi - alpha_i) is the same for every phase, which
// pins the angles alpha_i through the constraint sum(pi - alpha_i) = pi.
// As s -> 1 the balance degenerates to the classical weighted sine law;
// classical_angles solves that limit via the tension triangle.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fracluster/core.hpp"
#include "fracluster/quadrature.hpp"

namespace fracluster {

// int_0^alpha sin(t)^s dt for alpha in [0, pi], s in (0, 1)
inline double sin_pow_integral(double alpha, double s) {
  if (!(alpha > 0.0)) return 0.0;
  return integrate_adaptive([s](double t) { return std::pow(std::sin(t), s); }, 0.0,
                            std::min(alpha, pi), 1e-14);
}

// odd in alpha; |alpha| must stay below pi
inline double wedge_potential(double alpha, double s) {
  double sign = 1.0;
  if (alpha < 0.0) {
    alpha = -alpha;
    sign = -1.0;
  }
  if (alpha == 0.0) return 0.0;
  if (!(alpha < pi)) throw std::invalid_argument("wedge_potential: |alpha| must be < pi");
  return sign * (2.0 / s) * std::pow(std::sin(alpha), -s) * sin_pow_integral(alpha, s);
}

// d/dalpha wedge_potential = 2/s - s * wedge_potential * cot(alpha)
inline double wedge_potential_deriv(double alpha, double s, double value) {
  return 2.0 / s - s * value * std::cos(alpha) / std::sin(alpha);
}

// inverse of wedge_potential on (0, pi); y must be positive
inline double wedge_potential_inv(double y, double s) {
  if (!(y > 0.0)) throw std::invalid_argument("wedge_potential_inv: y must be positive");
  double lo = 0.0, hi = 0.5 * pi;
  // grow the bracket toward pi; the potential diverges there, so this ends
  for (int i = 0; i < 400 && wedge_potential(hi, s) < y; ++i) hi = pi - 0.5 * (pi - hi);
  for (int i = 0; i < 90; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (wedge_potential(mid, s) < y ? lo : hi) = mid;
  }
  double a = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {  // Newton polish inside the bracket
    double f = wedge_potential(a, s);
    double step = (f - y) / wedge_potential_deriv(a, s, f);
    double next = a - step;
    if (next <= lo || next >= hi) break;
    a = next;
  }
  return a;
}

struct ConeAngles {
  double k = 0.0;              // common balanced value c_i * wedge_potential(pi - alpha_i)
  std::vector<double> alpha;   // phase opening angles, sum = 2 pi for three phases
};

// residual of the balance between phases i and j at given angles
inline double cone_residual(const std::vector<double>& c, const std::vector<double>& alpha,
                            double s, std::size_t i, std::size_t j) {
  return c[i] * wedge_potential(pi - alpha[i], s) - c[j] * wedge_potential(pi - alpha[j], s);
}

// Solves sum_i inv(k / c_i) = pi for the unique k > 0, then
// alpha_i = pi - inv(k / c_i). Weights must be positive; scaling all of
// them scales k and leaves the angles untouched.
inline ConeAngles solve_cone_angles(const std::vector<double>& c, double s) {
  if (c.size() < 2) throw std::invalid_argument("solve_cone_angles: need at least two weights");
  for (double w : c)
    if (!(w > 0.0)) throw std::invalid_argument("solve_cone_angles: weights must be positive");
  auto gap_sum = [&](double k) {
    double t = 0.0;
    for (double w : c) t += wedge_potential_inv(k / w, s);
    return t - pi;
  };
  double hi = 1.0;
  for (int i = 0; i < 400 && gap_sum(hi) < 0.0; ++i) hi *= 2.0;
  double lo = hi;
  for (int i = 0; i < 400 && gap_sum(lo) > 0.0; ++i) lo *= 0.5;
  for (int i = 0; i < 100; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (gap_sum(mid) < 0.0 ? lo : hi) = mid;
  }
  ConeAngles out;
  out.k = 0.5 * (lo + hi);
  out.alpha.reserve(c.size());
  for (double w : c) out.alpha.push_back(pi - wedge_potential_inv(out.k / w, s));
  return out;
}

// Classical (s -> 1) limit angles for three weights: interface tensions
// t_i = c_j + c_k close into a triangle whose exterior angles are the
// phase openings. t_j + t_k - t_i = 2 c_i > 0, so every positive weight
// triple is admissible.
inline std::array<double, 3> classical_angles(const std::array<double, 3>& c) {
  for (double w : c)
    if (!(w > 0.0)) throw std::invalid_argument("classical_angles: weights must be positive");
  std::array<double, 3> t{c[1] + c[2], c[2] + c[0], c[0] + c[1]};
  std::array<double, 3> alpha{};
  for (int i = 0; i < 3; ++i) {
    int j = (i + 1) % 3, k = (i + 2) % 3;
    double cosb = (t[j] * t[j] + t[k] * t[k] - t[i] * t[i]) / (2.0 * t[j] * t[k]);
    cosb = std::clamp(cosb, -1.0, 1.0);
    alpha[i] = pi - std::acos(cosb);
  }
  return alpha;
}

}  // namespace fracluster
