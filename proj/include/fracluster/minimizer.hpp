#pragma once

// Discrete energy descent and junction geometry readout.
//
// The landscape is combinatorial (one label per interior cell), so descent
// is greedy single-cell relabeling: sweep the interior in shuffled order,
// apply the best strictly improving relabel per cell, stop when a sweep
// changes nothing. Multiple restarts (datum raster first, then random
// fields, optionally tempered by a short Metropolis stage) guard against
// the poor local minima random initializations tend to hit. Everything is
// seeded and the result is byte-reproducible across runs and thread
// counts.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fracluster/core.hpp"
#include "fracluster/energy.hpp"
#include "fracluster/geometry.hpp"

namespace fracluster {

struct AnnealOptions {
  bool enabled = false;
  double t0 = 0.5;        // initial temperature, in units of energy
  double cooling = 0.92;  // per-sweep multiplier
  int sweeps = 60;
};

struct MinimizeOptions {
  int restarts = 8;
  std::uint64_t seed = 1;
  int max_sweeps = 200;
  AnnealOptions anneal;  // applies to the random restarts only
  int threads = 0;
};

struct MinimizeResult {
  std::vector<std::uint8_t> labels;
  double energy = 0.0;
  int best_restart = 0;
  std::vector<double> restart_energies;
  std::vector<int> restart_sweeps;
};

namespace detail {

inline int greedy_sweeps(const EnergyModel& model, const std::vector<int>& cells,
                         std::vector<std::uint8_t>& lab, Rng& rng, int max_sweeps) {
  const int k = model.phase_count();
  std::vector<int> order = cells;
  int sweeps = 0;
  for (; sweeps < max_sweeps; ++sweeps) {
    rng.shuffle(order);
    int flips = 0;
    for (int a : order) {
      int p = lab[static_cast<std::size_t>(a)];
      int best_q = p;
      double best_d = -model.flip_threshold();
      for (int q = 0; q < k; ++q) {
        if (q == p) continue;
        double d = model.flip_delta(lab, a, q);
        if (d < best_d) {
          best_d = d;
          best_q = q;
        }
      }
      if (best_q != p) {
        lab[static_cast<std::size_t>(a)] = static_cast<std::uint8_t>(best_q);
        ++flips;
      }
    }
    if (flips == 0) break;
  }
  return sweeps;
}

inline void metropolis_stage(const EnergyModel& model, const std::vector<int>& cells,
                             std::vector<std::uint8_t>& lab, Rng& rng, const AnnealOptions& a) {
  const int k = model.phase_count();
  std::vector<int> order = cells;
  double t = a.t0;
  for (int sweep = 0; sweep < a.sweeps; ++sweep, t *= a.cooling) {
    rng.shuffle(order);
    for (int cell : order) {
      int p = lab[static_cast<std::size_t>(cell)];
      int q = static_cast<int>(rng.below(static_cast<std::uint64_t>(k - 1)));
      if (q >= p) ++q;
      double d = model.flip_delta(lab, cell, q);
      if (d < 0.0 || rng.unit() < std::exp(-d / std::max(t, 1e-300)))
        lab[static_cast<std::size_t>(cell)] = static_cast<std::uint8_t>(q);
    }
  }
}

}  // namespace detail

inline MinimizeResult minimize_labels(const Grid& g, const EnergyModel& model,
                                      const std::vector<std::uint8_t>& datum_labels,
                                      const MinimizeOptions& opt = {}) {
  const int k = model.phase_count();
  std::vector<int> cells;
  for (int c = 0; c < g.cell_count(); ++c)
    if (g.interior[static_cast<std::size_t>(c)]) cells.push_back(c);

  const int restarts = std::max(opt.restarts, 1);
  std::vector<std::vector<std::uint8_t>> fields(static_cast<std::size_t>(restarts));
  std::vector<double> energies(static_cast<std::size_t>(restarts), 0.0);
  std::vector<int> sweeps(static_cast<std::size_t>(restarts), 0);

  parallel_for(
      restarts,
      [&](int r) {
        Hash64 hsh;
        hsh.u64(opt.seed);
        hsh.i32(r);
        Rng rng(hsh.h);
        std::vector<std::uint8_t> lab = datum_labels;
        if (r > 0) {
          for (int c : cells)
            lab[static_cast<std::size_t>(c)] =
                static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(k)));
          if (opt.anneal.enabled) detail::metropolis_stage(model, cells, lab, rng, opt.anneal);
        }
        sweeps[static_cast<std::size_t>(r)] =
            detail::greedy_sweeps(model, cells, lab, rng, opt.max_sweeps);
        energies[static_cast<std::size_t>(r)] = model.total(lab);
        fields[static_cast<std::size_t>(r)] = std::move(lab);
      },
      opt.threads);

  MinimizeResult out;
  out.restart_energies = energies;
  out.restart_sweeps = sweeps;
  out.best_restart = 0;
  for (int r = 1; r < restarts; ++r)
    if (energies[static_cast<std::size_t>(r)] < energies[static_cast<std::size_t>(out.best_restart)])
      out.best_restart = r;
  out.labels = std::move(fields[static_cast<std::size_t>(out.best_restart)]);
  out.energy = energies[static_cast<std::size_t>(out.best_restart)];
  return out;
}

// ---------------------------------------------------------------------
// junction readout

struct JunctionRay {
  double angle = 0.0;  // direction of the interface ray, from the junction
  int p = 0, q = 0;    // the two phases it separates
  int points = 0;      // midpoints used in the fit
  double rms = 0.0;    // perpendicular scatter of those midpoints
};

struct JunctionReport {
  bool found = false;
  Vec2 location{0.0, 0.0};
  std::vector<JunctionRay> rays;         // sorted by angle
  std::vector<double> phase_angles;      // opening per phase, 0 if absent
};

struct MeasureOptions {
  double r_inner_cells = 4.0;   // annulus bounds in cell widths
  double r_outer_cells = 12.0;
};

// Locates the (single) multiple point of a label field and measures the
// opening angle of each phase there. Interface midpoints in an annulus
// around the junction are fitted with one line per phase pair; the gaps
// between consecutive rays are attributed to phases by probing the label
// field along the gap bisector. Angular resolution is limited by the
// staircase of the grid, roughly h / r_outer.
inline JunctionReport measure_junction(const Grid& g, const std::vector<std::uint8_t>& lab,
                                       MeasureOptions opt = {}) {
  JunctionReport rep;
  rep.phase_angles.assign(256, 0.0);

  std::vector<Vec2> corners;
  for (int j = 1; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) {
      int seen[256] = {};
      int distinct = 0;
      for (int dj = -2; dj <= 1; ++dj)
        for (int di = -2; di <= 1; ++di) {
          int ci = i + di, cj = j + dj;
          if (ci < 0 || cj < 0 || ci >= g.nx || cj >= g.ny) continue;
          int ph = lab[static_cast<std::size_t>(g.idx(ci, cj))];
          if (!seen[ph]) {
            seen[ph] = 1;
            ++distinct;
          }
        }
      if (distinct >= 3)
        corners.push_back({g.box.lo.x + i * g.h, g.box.lo.y + j * g.h});
    }
  if (corners.empty()) {
    rep.phase_angles.clear();
    return rep;
  }
  Vec2 centroid{0.0, 0.0};
  for (Vec2 c : corners) centroid = centroid + c;
  centroid = (1.0 / static_cast<double>(corners.size())) * centroid;
  rep.location = corners[0];
  double best = norm2(corners[0] - centroid);
  for (Vec2 c : corners) {
    double d2 = norm2(c - centroid);
    if (d2 < best - 1e-15) {
      best = d2;
      rep.location = c;
    }
  }

  double r_out = std::min(opt.r_outer_cells * g.h,
                          0.45 * std::min(g.box.width(), g.box.height()));
  double r_in = std::min(opt.r_inner_cells * g.h, 0.5 * r_out);

  // interface midpoints per unordered phase pair
  struct Fit {
    std::vector<Vec2> pts;
  };
  std::vector<int> pair_of(256 * 256, -1);
  std::vector<Fit> fits;
  std::vector<std::pair<int, int>> fit_pair;
  auto add_point = [&](int p, int q, Vec2 m) {
    double r = norm(m - rep.location);
    if (r < r_in || r > r_out) return;
    if (p > q) std::swap(p, q);
    int& slot = pair_of[static_cast<std::size_t>(p) * 256 + q];
    if (slot < 0) {
      slot = static_cast<int>(fits.size());
      fits.push_back({});
      fit_pair.push_back({p, q});
    }
    fits[static_cast<std::size_t>(slot)].pts.push_back(m);
  };
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      int a = g.idx(i, j);
      Vec2 c = g.center(a);
      if (i + 1 < g.nx) {
        int b = g.idx(i + 1, j);
        if (lab[static_cast<std::size_t>(a)] != lab[static_cast<std::size_t>(b)])
          add_point(lab[static_cast<std::size_t>(a)], lab[static_cast<std::size_t>(b)],
                    {c.x + 0.5 * g.h, c.y});
      }
      if (j + 1 < g.ny) {
        int b = g.idx(i, j + 1);
        if (lab[static_cast<std::size_t>(a)] != lab[static_cast<std::size_t>(b)])
          add_point(lab[static_cast<std::size_t>(a)], lab[static_cast<std::size_t>(b)],
                    {c.x, c.y + 0.5 * g.h});
      }
    }

  for (std::size_t f = 0; f < fits.size(); ++f) {
    const auto& pts = fits[f].pts;
    if (pts.size() < 6) continue;
    Vec2 mean{0.0, 0.0};
    for (Vec2 p : pts) mean = mean + p;
    mean = (1.0 / static_cast<double>(pts.size())) * mean;
    double cxx = 0.0, cxy = 0.0, cyy = 0.0;
    for (Vec2 p : pts) {
      Vec2 d = p - mean;
      cxx += d.x * d.x;
      cxy += d.x * d.y;
      cyy += d.y * d.y;
    }
    double theta = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
    Vec2 u{std::cos(theta), std::sin(theta)};
    if (dot(u, mean - rep.location) < 0.0) u = -1.0 * u;
    double rms = 0.0;
    for (Vec2 p : pts) {
      double perp = cross(u, p - rep.location);
      rms += perp * perp;
    }
    JunctionRay ray;
    ray.angle = wrap_angle(std::atan2(u.y, u.x));
    ray.p = fit_pair[f].first;
    ray.q = fit_pair[f].second;
    ray.points = static_cast<int>(pts.size());
    ray.rms = std::sqrt(rms / static_cast<double>(pts.size()));
    rep.rays.push_back(ray);
  }
  std::sort(rep.rays.begin(), rep.rays.end(),
            [](const JunctionRay& a, const JunctionRay& b) { return a.angle < b.angle; });
  if (rep.rays.size() < 3) {
    rep.phase_angles.clear();
    return rep;
  }

  double r_probe = 0.5 * (r_in + r_out);
  int max_phase = 0;
  for (std::size_t r = 0; r < rep.rays.size(); ++r) {
    const auto& cur = rep.rays[r];
    const auto& nxt = rep.rays[(r + 1) % rep.rays.size()];
    double gap = wrap_angle(nxt.angle - cur.angle);
    if (gap == 0.0 && rep.rays.size() > 1) gap = two_pi;
    double mid = cur.angle + 0.5 * gap;
    Vec2 probe = rep.location + r_probe * Vec2{std::cos(mid), std::sin(mid)};
    int pi_idx = std::clamp(static_cast<int>((probe.x - g.box.lo.x) / g.h), 0, g.nx - 1);
    int pj_idx = std::clamp(static_cast<int>((probe.y - g.box.lo.y) / g.h), 0, g.ny - 1);
    int ph = lab[static_cast<std::size_t>(g.idx(pi_idx, pj_idx))];
    rep.phase_angles[static_cast<std::size_t>(ph)] += gap;
    max_phase = std::max(max_phase, ph);
  }
  rep.phase_angles.resize(static_cast<std::size_t>(max_phase) + 1);
  rep.found = true;
  return rep;
}

}  // namespace fracluster
