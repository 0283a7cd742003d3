#include <catch2/catch_amalgamated.hpp>

#include "fracluster/geometry.hpp"
#include "fracluster/kernel.hpp"
#include "oracles.hpp"

using namespace fracluster;

// Reference couplings of unit cells at integer offsets, pinned from
// Richardson-extrapolated Riemann ladders run far beyond the levels the
// live check below uses. Digits beyond the last are not trusted.
namespace {
constexpr double j10_s05 = 3.6470875155031;
constexpr double j11_s05 = 0.67600839868595;
constexpr double j20_s05 = 0.20328767214613;
constexpr double j21_s05 = 0.15031451202919;
constexpr double j10_s09 = 19.379525543387;
constexpr double j11_s09 = 0.75673141301187;
constexpr double j10_s099 = 199.29329658407;
constexpr double j100_s05 = 0.00317883233967973;
}  // namespace

TEST_CASE("cell coupling matches pinned references") {
  CHECK_THAT(j_cells(1, 0, 1, 0.5), Catch::Matchers::WithinRel(j10_s05, 3e-9));
  CHECK_THAT(j_cells(1, 1, 1, 0.5), Catch::Matchers::WithinRel(j11_s05, 3e-9));
  CHECK_THAT(j_cells(2, 0, 1, 0.5), Catch::Matchers::WithinRel(j20_s05, 3e-9));
  CHECK_THAT(j_cells(2, 1, 1, 0.5), Catch::Matchers::WithinRel(j21_s05, 3e-9));
  CHECK_THAT(j_cells(1, 0, 1, 0.9), Catch::Matchers::WithinRel(j10_s09, 3e-9));
  CHECK_THAT(j_cells(1, 1, 1, 0.9), Catch::Matchers::WithinRel(j11_s09, 3e-9));
  CHECK_THAT(j_cells(1, 0, 1, 0.99), Catch::Matchers::WithinRel(j10_s099, 3e-9));
}

TEST_CASE("cell coupling agrees with a live Riemann ladder") {
  auto a = oracle::cell_pair(1, 0, 0.5);
  CHECK(std::abs(j_cells(1, 0, 1, 0.5) - a.value) <= std::max(4.0 * a.error, 1e-5 * a.value));
  auto b = oracle::cell_pair(1, 1, 0.9);
  CHECK(std::abs(j_cells(1, 1, 1, 0.9) - b.value) <= std::max(4.0 * b.error, 1e-5 * b.value));
  auto c = oracle::cell_pair(2, 1, 0.5);
  CHECK(std::abs(j_cells(2, 1, 1, 0.5) - c.value) <= std::max(4.0 * c.error, 1e-5 * c.value));
}

TEST_CASE("distant cells: midpoint value is measurably off, quadrature is not") {
  // at offset (10, 0) the corrected midpoint rule is 2.7e-5 low; with a
  // tight tolerance the gate must route to full quadrature
  double tight = j_cells(10, 0, 1, 0.5, 1e-6);
  CHECK_THAT(tight, Catch::Matchers::WithinRel(j100_s05, 1e-8));
  // with a loose tolerance the cheap path is taken and lands within it
  double loose = j_cells(10, 0, 1, 0.5, 1e-4);
  CHECK_THAT(loose, Catch::Matchers::WithinRel(0.0031787478563151, 1e-12));
  CHECK(std::abs(loose - j100_s05) / j100_s05 < 1e-4);
  double bare = std::pow(10.0, -2.5);
  CHECK(std::abs(bare - j100_s05) / j100_s05 > 5e-3);  // uncorrected midpoint would fail
}

TEST_CASE("cell coupling symmetry and scaling") {
  double s = 0.7;
  CHECK_THAT(j_cells(1, 2, 1, s), Catch::Matchers::WithinRel(j_cells(2, 1, 1, s), 1e-12));
  CHECK_THAT(j_cells(-3, 2, 1, s), Catch::Matchers::WithinRel(j_cells(3, -2, 1, s), 1e-14));
  // h^(2-s) homogeneity, offsets scaled with the cell
  double h = 0.25;
  CHECK_THAT(j_cells(2 * h, h, h, s),
             Catch::Matchers::WithinRel(std::pow(h, 2.0 - s) * j_cells(2, 1, 1, s), 1e-13));
  CHECK_THAT(j_cells(h, 0, h, s),
             Catch::Matchers::WithinRel(std::pow(h, 2.0 - s) * j_cells(1, 0, 1, s), 1e-13));
}

TEST_CASE("overlapping cells are rejected") {
  CHECK_THROWS_AS(j_cells(0, 0, 1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(j_cells(0.5, 0.5, 1, 0.5), std::invalid_argument);
  CHECK_NOTHROW(j_cells(1, 0.5, 1, 0.5));  // offset but disjoint
}

namespace {

// closed forms for a cell against a half-plane at distance d across a
// box edge: integrate (C_s/s) (d + y)^(-s) over the cell
double hp_cell_closed(double lo_dist, double h, double s) {
  double q = 1.0 - s;
  return h * (cs_constant(s) / s) * (std::pow(lo_dist + h, q) - std::pow(lo_dist, q)) / q;
}

}  // namespace

TEST_CASE("cell to outside half-plane, contact and gap closed forms") {
  double s = 0.5;
  Grid g = build_grid(Box{{0.0, 0.0}, {1.0, 1.0}}, 4, WholePlane{});
  AnalyticRegion hp = HalfPlane({0.0, 1.0}, 1.0);  // everything above the box

  // top row touches the region across the box edge; lower rows see it at
  // distances h, 2h, 3h (r_cut off: the closed forms integrate to infinity)
  for (int row = 0; row < 4; ++row) {
    double dist = (3 - row) * g.h;
    double want = hp_cell_closed(dist, g.h, s);
    RegionCoupling rc = j_cell_region(g, g.idx(1, row), hp, s, 1e300);
    CHECK_THAT(rc.value, Catch::Matchers::WithinRel(want, row == 3 ? 5e-8 : 5e-9));
  }
  // exact contact reference for the h = 1 case, one cell grid
  Grid g1 = build_grid(Box{{0.0, 0.0}, {1.0, 1.0}}, 1, WholePlane{});
  double contact = j_cell_region(g1, 0, hp, s, 1e300).value;
  CHECK_THAT(contact, Catch::Matchers::WithinRel(9.58512187788472, 5e-8));
  double gap1 = j_cell_region(g1, 0, AnalyticRegion(HalfPlane({0.0, 1.0}, 2.0)), s, 1e300).value;
  CHECK_THAT(gap1, Catch::Matchers::WithinRel(3.97028747881893, 5e-9));

  // a finite r_cut removes, to leading order, exactly pi h^2 r^-s / s
  double cut = j_cell_region(g1, 0, hp, s, 1e6).value;
  double removed = pi * std::pow(1e6, -s) / s;
  CHECK_THAT(contact - cut, Catch::Matchers::WithinRel(removed, 1e-4));
}

TEST_CASE("half-plane region equals the same region written as sectors") {
  double s = 0.63;
  Grid g = build_grid(Box{{0.0, 0.0}, {1.0, 1.0}}, 4, WholePlane{});
  AnalyticRegion hp = HalfPlane({0.0, 1.0}, 1.0);
  AnalyticRegion full = Sector({0.3, 1.0}, 0.0, pi);  // same upper half-plane
  AnalyticRegion left = Sector({0.3, 1.0}, pi / 3, pi);
  AnalyticRegion right = Sector({0.3, 1.0}, 0.0, pi / 3);

  for (int cell : {g.idx(0, 0), g.idx(2, 1), g.idx(1, 3)}) {
    double a = j_cell_region(g, cell, hp, s, 1e6).value;
    double b = j_cell_region(g, cell, full, s, 1e6).value;
    double c = j_cell_region(g, cell, left, s, 1e6).value +
               j_cell_region(g, cell, right, s, 1e6).value;
    CHECK_THAT(b, Catch::Matchers::WithinRel(a, 2e-5));
    CHECK_THAT(c, Catch::Matchers::WithinRel(a, 2e-5));
  }
}

TEST_CASE("polygon region at integer offset reproduces the cell pair value") {
  // a unit-square polygon two cells to the right of the box is exactly the
  // (2, 0) cell pair, via a completely different evaluation path
  Grid g1 = build_grid(Box{{0.0, 0.0}, {1.0, 1.0}}, 1, WholePlane{});
  AnalyticRegion sq = PolygonRegion({{2.0, 0.0}, {3.0, 0.0}, {3.0, 1.0}, {2.0, 1.0}});
  double v = j_cell_region(g1, 0, sq, 0.5, 1e6).value;
  CHECK_THAT(v, Catch::Matchers::WithinRel(j20_s05, 1e-6));
}

TEST_CASE("outside coupling truncation is controlled by the tail bound") {
  double s = 0.5;
  Grid g1 = build_grid(Box{{0.0, 0.0}, {1.0, 1.0}}, 1, WholePlane{});
  AnalyticRegion hp = HalfPlane({0.0, 1.0}, 1.0);
  double near = j_cell_region(g1, 0, hp, s, 6.0).value;
  double far = j_cell_region(g1, 0, hp, s, 1e6).value;
  CHECK(far > near);
  CHECK(far - near <= point_tail_bound(1.0, 6.0, s));
  RegionCoupling rc = j_cell_region(g1, 0, hp, s, 6.0);
  CHECK(rc.tail_bound == point_tail_bound(1.0, 6.0, s));
}
