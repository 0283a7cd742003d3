// Acceptance checks for the library + CLI. Each criterion prints one
// PASS/FAIL line; the exit status is the number of failures. argv[1] must
// name the fracluster CLI binary (used by the determinism criterion).
//
// Tolerances and runtime budgets are pinned next to each criterion.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "fracluster/fracluster.hpp"
#include "oracles.hpp"

using namespace fracluster;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// least-squares intercept of y = a + b u
double fit_intercept(const std::vector<double>& u, const std::vector<double>& y) {
  double n = static_cast<double>(u.size()), su = 0, suu = 0, sy = 0, suy = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    su += u[i];
    suu += u[i] * u[i];
    sy += y[i];
    suy += u[i] * y[i];
  }
  double det = n * suu - su * su;
  return (sy * suu - su * suy) / det;
}

struct MinimizeSetup {
  Grid g;
  Datum d;
  std::vector<std::uint8_t> datum_lab;
  InteractionMatrix m;
  std::vector<double> weights;
};

MinimizeSetup make_setup(Box box, int n, OmegaShape omega, Datum d, std::vector<double> weights,
                         double s, double quad_tol, double r_cut = 1e6) {
  MinimizeSetup su{build_grid(box, n, omega), std::move(d), {}, {}, std::move(weights)};
  su.datum_lab = rasterize_datum(su.g, su.d);
  MatrixParams mp;
  mp.s = s;
  mp.quad_tol = quad_tol;
  mp.r_cut = r_cut;
  su.m = build_interaction_matrix(su.g, su.d, mp);
  return su;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  int failures = 0;

  auto run = [&](int id, const char* what, auto&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = fn(detail);
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %2d [%s]: %s (%.1f s)%s%s\n", id, what, ok ? "PASS" : "FAIL",
                seconds_since(t0), detail.empty() ? "" : " ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  };

  run(1, "equal weights give three 2pi/3 angles", [&](std::string& d) {
    constexpr double tol = 1e-8, budget = 5.0;
    bool ok = true;
    double worst = 0.0;
    for (double s : {0.3, 0.5, 0.9}) {
      auto t0 = std::chrono::steady_clock::now();
      ConeAngles r = solve_cone_angles({1.0, 1.0, 1.0}, s);
      double dt = seconds_since(t0);
      for (double a : r.alpha) worst = std::max(worst, std::abs(a - two_pi / 3.0));
      ok = ok && dt < budget;
    }
    ok = ok && worst <= tol;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "max |alpha - 2pi/3| = %.2e", worst);
    d = buf;
    return ok;
  });

  run(2, "random weights: angles close up and balance", [&](std::string& d) {
    constexpr double tol_sum = 1e-9, tol_res = 1e-7;
    Rng rng(42);
    double worst_sum = 0.0, worst_res = 0.0;
    for (int t = 0; t < 20; ++t) {
      std::vector<double> c{0.25 + 4.0 * rng.unit(), 0.25 + 4.0 * rng.unit(),
                            0.25 + 4.0 * rng.unit()};
      for (double s : {0.4, 0.8}) {
        ConeAngles r = solve_cone_angles(c, s);
        double sum = r.alpha[0] + r.alpha[1] + r.alpha[2];
        worst_sum = std::max(worst_sum, std::abs(sum - two_pi));
        for (std::size_t i = 0; i < 3; ++i)
          worst_res = std::max(
              worst_res, std::abs(cone_residual(c, r.alpha, s, i, (i + 1) % 3)));
      }
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "max |sum - 2pi| = %.2e, max residual = %.2e", worst_sum,
                  worst_res);
    d = buf;
    return worst_sum <= tol_sum && worst_res <= tol_res;
  });

  run(3, "angles ignore a common weight factor", [&](std::string& d) {
    constexpr double tol = 1e-8;
    std::vector<double> c{1.0, 2.2, 0.7};
    ConeAngles base = solve_cone_angles(c, 0.6);
    double worst = 0.0;
    for (double lam : {0.1, 7.0}) {
      std::vector<double> cs{lam * c[0], lam * c[1], lam * c[2]};
      ConeAngles r = solve_cone_angles(cs, 0.6);
      for (std::size_t i = 0; i < 3; ++i)
        worst = std::max(worst, std::abs(r.alpha[i] - base.alpha[i]));
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "max angle shift = %.2e", worst);
    d = buf;
    return worst <= tol;
  });

  run(4, "wedge potential matches direct quadrature", [&](std::string& d) {
    constexpr double tol_rel = 1e-5;
    double worst = 0.0;
    for (auto [alpha, s] : {std::pair{pi / 3.0, 0.5}, std::pair{pi / 2.0, 0.7}}) {
      double got = wedge_potential(alpha, s);
      double want = oracle::wedge_potential_direct(alpha, s);
      worst = std::max(worst, std::abs(got - want) / std::abs(want));
    }
    bool zero_exact = wedge_potential(0.0, 0.5) == 0.0 && wedge_potential(0.0, 0.8) == 0.0;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "max rel err = %.2e, value at 0 %s exactly 0", worst,
                  zero_exact ? "is" : "IS NOT");
    d = buf;
    return worst <= tol_rel && zero_exact;
  });

  run(5, "boundary curvature: flat zero, sign, scaling", [&](std::string& d) {
    constexpr double tol_flat = 1e-6, tol_scale = 1e-5, tol_cross = 1e-4, budget = 60.0;
    auto t0 = std::chrono::steady_clock::now();
    double flat =
        fractional_curvature(AnalyticRegion(HalfPlane({0.6, 0.8}, -0.2)),
                             {-0.2 * 0.6 - 0.8 * 0.5, -0.2 * 0.8 + 0.6 * 0.5}, 0.5).value;
    bool ok = std::abs(flat) <= tol_flat;

    // sign of the curvature at a wedge apex distance 1: convex corners
    // (opening below pi) push one way, reflex corners the other
    for (double opening : {1.2, 2.6})
      ok = ok && fractional_curvature(Sector({0.0, 0.0}, 0.0, opening), {1.0, 0.0}, 0.5).value > 0.0;
    for (double opening : {3.8, 5.2})
      ok = ok && fractional_curvature(Sector({0.0, 0.0}, 0.0, opening), {1.0, 0.0}, 0.5).value < 0.0;

    double worst_scale = 0.0;
    {
      double s = 0.5;
      AnalyticRegion sec = Sector({0.0, 0.0}, 0.0, 2.2);
      double h1 = fractional_curvature(sec, {1.0, 0.0}, s).value;
      for (double lam : {0.5, 2.0}) {
        double hl = fractional_curvature(sec, {lam, 0.0}, s).value;
        worst_scale = std::max(worst_scale, std::abs(h1 - std::pow(lam, s) * hl) / std::abs(h1));
      }
    }
    double worst_cross = 0.0;
    for (auto [opening, s] : {std::pair{1.0, 0.5}, std::pair{2.9, 0.5},
                              std::pair{2.0 * pi / 3.0, 0.7}, std::pair{4.0, 0.3}}) {
      double got = fractional_curvature(Sector({0.0, 0.0}, 0.0, opening), {1.0, 0.0}, s).value;
      double want = wedge_potential(pi - opening, s);
      worst_cross = std::max(worst_cross, std::abs(got - want) / std::abs(want));
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "flat = %.1e, scale err = %.2e, wedge cross-check = %.2e",
                  flat, worst_scale, worst_cross);
    d = buf;
    return ok && worst_scale <= tol_scale && worst_cross <= tol_cross &&
           seconds_since(t0) < budget;
  });

  run(6, "cell couplings and flip bookkeeping vs oracles", [&](std::string& d) {
    constexpr double tol_pair = 1e-6, tol_flip = 1e-9, tol_sym = 1e-12;
    double worst_pair = 0.0;
    const int pairs[10][2] = {{1, 0}, {1, 1}, {2, 0}, {2, 1}, {2, 2},
                              {3, 0}, {3, 1}, {3, 2}, {4, 0}, {4, 3}};
    for (auto& p : pairs) {
      oracle::Extrapolated want = oracle::cell_pair(p[0], p[1], 0.5);
      double got = j_cells(p[0], p[1], 1.0, 0.5);
      worst_pair = std::max(worst_pair, std::abs(got - want.value) / want.value);
    }

    MinimizeSetup su =
        make_setup(Box{{0.0, 0.0}, {1.0, 1.0}}, 8, Disk{{0.5, 0.5}, 0.3},
                   half_plane_datum({0.0, 1.0}, 0.5), {1.0, 1.0}, 0.5, 1e-4);
    EnergyModel model(su.g, su.m, su.weights);
    std::vector<int> cells;
    for (int c = 0; c < su.g.cell_count(); ++c)
      if (su.g.interior[static_cast<std::size_t>(c)]) cells.push_back(c);
    Rng rng(7);
    auto lab = su.datum_lab;
    double base = model.total(lab), worst_flip = 0.0;
    for (int t = 0; t < 100; ++t) {
      int a = cells[static_cast<std::size_t>(rng.below(cells.size()))];
      int q = static_cast<int>(rng.below(2));
      double delta = model.flip_delta(lab, a, q);
      auto lab2 = lab;
      lab2[static_cast<std::size_t>(a)] = static_cast<std::uint8_t>(q);
      double diff = model.total(lab2) - base;
      worst_flip = std::max(worst_flip, std::abs(delta - diff));
      if (rng.unit() < 0.5) {  // wander through label space
        lab = lab2;
        base = model.total(lab);
      }
    }
    auto per = model.phase_perimeters(su.datum_lab);
    double sym = std::abs(per[0] - per[1]);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "pair rel = %.2e, flip abs = %.2e, perimeter split = %.2e",
                  worst_pair, worst_flip, sym);
    d = buf;
    return worst_pair <= tol_pair && worst_flip <= tol_flip &&
           sym <= tol_sym * std::max(1.0, per[0]);
  });

  run(7, "descent attains the exhaustive optimum", [&](std::string& d) {
    constexpr double budget = 30.0;
    auto t0 = std::chrono::steady_clock::now();
    const Vec2 normals[4] = {{0.0, 1.0}, {1.0, 0.0}, {0.6, 0.8}, {-1.0, 1.0}};
    const double offsets[4] = {0.4, 0.35, 0.1, -0.15};
    bool ok = true;
    double worst = 0.0;
    for (int t = 0; t < 4; ++t) {
      // exhaustive and greedy share one matrix, so a short kernel range is
      // fine here and keeps the radial profiles cheap
      MinimizeSetup su = make_setup(Box{{0.0, 0.0}, {1.0, 1.0}}, 3, WholePlane{},
                                    half_plane_datum(normals[t], offsets[t]), {1.0, 1.0}, 0.5,
                                    1e-4, 100.0);
      EnergyModel model(su.g, su.m, su.weights);
      double best = std::numeric_limits<double>::infinity();
      for (int mask = 0; mask < 512; ++mask) {
        std::vector<std::uint8_t> lab(9);
        for (int c = 0; c < 9; ++c) lab[c] = static_cast<std::uint8_t>((mask >> c) & 1);
        best = std::min(best, model.total(lab));
      }
      MinimizeOptions opt;
      opt.restarts = 6;
      opt.seed = 3;
      MinimizeResult res = minimize_labels(su.g, model, su.datum_lab, opt);
      worst = std::max(worst, std::abs(res.energy - best) / std::max(1.0, std::abs(best)));
      ok = ok && res.energy <= best + 1e-12 * std::max(1.0, std::abs(best));
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "4 exterior data, max energy gap = %.1e", worst);
    d = buf;
    return ok && seconds_since(t0) < budget;
  });

  run(8, "a triple junction forms and its angles balance", [&](std::string& d) {
    constexpr double budget = 300.0, tol_angle = 5.0 * pi / 180.0;
    auto t0 = std::chrono::steady_clock::now();
    MinimizeSetup su = make_setup(Box{{-1.0, -1.0}, {1.0, 1.0}}, 64, Disk{{0.0, 0.0}, 0.6},
                                  steiner_datum(), {1.0, 1.0, 1.0}, 0.9, 1e-4);
    EnergyModel model(su.g, su.m, su.weights);
    // Single descent from the rasterized datum: the check is that the
    // junction survives flip-by-flip relaxation with balanced angles. A
    // multi-start search is the wrong probe at s = 0.9 on a 64^2 grid:
    // staircased rays carry a real cost premium over axis-aligned ones
    // (most of the crossing energy sits below the cell scale), so the
    // lattice ground state parks the junction a few cells off-center
    // with widened angles. That is a property of rasterized sets, not of
    // the continuum energy, and it shrinks as s decreases or h -> 0.
    MinimizeOptions opt;
    opt.restarts = 1;
    opt.seed = 1;
    MinimizeResult res = minimize_labels(su.g, model, su.datum_lab, opt);
    JunctionReport rep = measure_junction(su.g, res.labels);
    bool ok = rep.found && norm(rep.location) <= 4.0 * su.g.h && rep.phase_angles.size() == 3;
    double worst = 0.0;
    if (rep.found && rep.phase_angles.size() == 3)
      for (double a : rep.phase_angles) worst = std::max(worst, std::abs(a - two_pi / 3.0));
    ok = ok && worst <= tol_angle;
    char buf[160];
    if (rep.found && rep.phase_angles.size() == 3)
      std::snprintf(buf, sizeof(buf),
                    "junction at (%.3f, %.3f), angles (deg) %.1f %.1f %.1f, max dev %.2f deg",
                    rep.location.x, rep.location.y, rep.phase_angles[0] * 180.0 / pi,
                    rep.phase_angles[1] * 180.0 / pi, rep.phase_angles[2] * 180.0 / pi,
                    worst * 180.0 / pi);
    else if (rep.found)
      std::snprintf(buf, sizeof(buf), "junction at (%.3f, %.3f) but %zu phase angles",
                    rep.location.x, rep.location.y, rep.phase_angles.size());
    else
      std::snprintf(buf, sizeof(buf), "no junction found");
    d = buf;
    return ok && seconds_since(t0) < budget;
  });

  run(9, "sharper kernels track the classical cone", [&](std::string& d) {
    // deviation from the straight-ray datum, away from the center, must
    // not grow as s increases; and the balanced angles for weights
    // (1,1,2) must be closer to the classical limit at s=0.99 than at 0.9
    double areas[3] = {0.0, 0.0, 0.0};
    const double svals[3] = {0.6, 0.8, 0.95};
    for (int i = 0; i < 3; ++i) {
      MinimizeSetup su = make_setup(Box{{-1.0, -1.0}, {1.0, 1.0}}, 32, Disk{{0.0, 0.0}, 0.6},
                                    steiner_datum(), {1.0, 1.0, 1.0}, svals[i], 1e-4);
      EnergyModel model(su.g, su.m, su.weights);
      MinimizeOptions opt;
      opt.restarts = 1;
      opt.seed = 1;
      MinimizeResult res = minimize_labels(su.g, model, su.datum_lab, opt);
      int cells = 0;
      for (int c = 0; c < su.g.cell_count(); ++c)
        if (su.g.interior[static_cast<std::size_t>(c)] && norm(su.g.center(c)) > 0.2 &&
            res.labels[static_cast<std::size_t>(c)] != su.datum_lab[static_cast<std::size_t>(c)])
          ++cells;
      areas[i] = cells * su.g.h * su.g.h;
    }
    bool area_ok = areas[0] >= areas[1] && areas[1] >= areas[2];

    std::array<double, 3> cl = classical_angles({1.0, 1.0, 2.0});
    auto gap = [&](double s) {
      ConeAngles r = solve_cone_angles({1.0, 1.0, 2.0}, s);
      double g = 0.0;
      for (int i = 0; i < 3; ++i) g = std::max(g, std::abs(r.alpha[i] - cl[i]));
      return g;
    };
    double g90 = gap(0.90), g99 = gap(0.99);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "drift area %.4f -> %.4f -> %.4f, angle gap %.2e (s=0.9) vs %.2e (s=0.99)",
                  areas[0], areas[1], areas[2], g90, g99);
    d = buf;
    return area_ok && g99 < g90;
  });

  run(10, "scaled energies extrapolate to twice the cut length", [&](std::string& d) {
    constexpr double tol_rel = 0.05;
    // closed-form check of the s -> 1 constant first: a point at distance
    // t from a half-plane sees (C_s / s) t^-s, and integrating across a
    // unit-length strip gives (1 - s) Per -> 2 per unit length
    double om1 = cs_constant(1.0 - 1e-6) / (1.0 - 1e-6);
    if (std::abs(om1 - 2.0) > 1e-3) {
      d = "1d constant check failed";
      return false;
    }
    std::vector<double> u, y;
    for (double s : {0.8, 0.9, 0.95, 0.99}) {
      MinimizeSetup su = make_setup(Box{{0.0, 0.0}, {1.0, 1.0}}, 4, WholePlane{},
                                    half_plane_datum({0.0, 1.0}, 0.5), {1.0, 1.0}, s, 1e-5);
      EnergyModel model(su.g, su.m, su.weights);
      double per = model.phase_perimeters(su.datum_lab)[0];
      u.push_back(1.0 - s);
      y.push_back((1.0 - s) * per);
    }
    double intercept = fit_intercept(u, y);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "intercept %.4f vs 2 (rel dev %.2f%%)", intercept,
                  50.0 * std::abs(intercept - 2.0));
    d = buf;
    return std::abs(intercept - 2.0) <= tol_rel * 2.0;
  });

  run(11, "repeated runs write identical bytes", [&](std::string& d) {
    if (cli.empty()) {
      d = "no CLI binary path given (argv[1])";
      return false;
    }
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() /
                   ("fracluster_accept_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir / "cache");
    std::string cfg = (dir / "run.json").string();
    atomic_write_file(cfg, R"({
      "s": 0.5, "weights": [1.0, 1.3, 2.0],
      "box": {"lo": [-1, -1], "hi": [1, 1]}, "n": 16,
      "omega": {"type": "disk", "radius": 0.6},
      "datum": {"type": "steiner"},
      "numerics": {"quad_tol": 1e-4, "threads": 1},
      "minimize": {"restarts": 2, "seed": 9, "max_sweeps": 120}
    })");
    ::setenv("FRACLUSTER_CACHE_DIR", (dir / "cache").string().c_str(), 1);
    auto invoke = [&](const std::string& prefix) {
      std::string cmd = "\"" + cli + "\" minimize --config \"" + cfg + "\" --out-prefix \"" +
                        (dir / prefix).string() + "\" > /dev/null 2>&1";
      return std::system(cmd.c_str()) == 0;
    };
    bool ran = invoke("a") && invoke("b");
    ::unsetenv("FRACLUSTER_CACHE_DIR");
    std::string la = read_file_bytes((dir / "a_labels.pgm").string());
    std::string lb = read_file_bytes((dir / "b_labels.pgm").string());
    std::string ra = read_file_bytes((dir / "a_report.json").string());
    std::string rb = read_file_bytes((dir / "b_report.json").string());
    bool ok = ran && !la.empty() && la == lb && !ra.empty() && ra == rb;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "labels %zu bytes %s, reports %s", la.size(),
                  la == lb ? "identical" : "DIFFER", ra == rb ? "identical" : "DIFFER");
    d = buf;
    fs::remove_all(dir);
    return ok;
  });

  std::printf("%d of 11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
