#pragma once

// Discrete cluster energy on a grid. Every cell carries a phase label; the
// energy is the weighted sum of kernel couplings between cells of distinct
// phases plus couplings between cells and the analytic datum regions
// outside the box:
//
//   E = sum_{a<b, labels differ} (c_la + c_lb) K(a, b)
//     + sum_{a interior} sum_{j != la} (c_la + c_j) R(a, j)
//
// where K is translation invariant (one Toeplitz table per grid) and R is
// the cell-to-outside coupling. Pairs between two frozen cells are a
// label-independent constant and are dropped; so is frozen-to-outside.
// Dropping them shifts the energy by a constant and leaves every label
// comparison unchanged.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fracluster/core.hpp"
#include "fracluster/geometry.hpp"
#include "fracluster/kernel.hpp"

namespace fracluster {

struct MatrixParams {
  double s = 0.5;
  double r_cut = 1e6;      // outside-coupling truncation radius
  double quad_tol = 1e-6;  // relative quadrature tolerance
  int threads = 0;         // 0 = hardware concurrency
};

// Precomputed couplings for one grid + datum. offs is indexed by
// (|di| + nx * |dj|); offs[0] is never used (a cell does not couple to
// itself) and stored as 0. region is dense cell-major, zero for frozen
// cells. tail_bound is the kernel mass a single cell can see beyond
// r_cut; multiply by interior count and twice the largest weight for a
// bound on the neglected energy.
struct InteractionMatrix {
  int nx = 0, ny = 0, k = 0;
  double h = 0.0;
  MatrixParams params;
  std::vector<double> offs;
  std::vector<double> region;
  double cell_tail_bound = 0.0;

  double pair(int a, int b) const {
    int dx = a % nx - b % nx, dy = a / nx - b / nx;
    return offs[static_cast<std::size_t>(std::abs(dx) + nx * std::abs(dy))];
  }
};

inline InteractionMatrix build_interaction_matrix(const Grid& g, const Datum& d,
                                                  const MatrixParams& p) {
  if (!(p.s > 0.0 && p.s < 1.0))
    throw std::invalid_argument("build_interaction_matrix: s must lie in (0, 1)");
  double diam = std::hypot(g.box.width(), g.box.height());
  if (!(p.r_cut >= 4.0 * diam))
    throw std::invalid_argument("build_interaction_matrix: r_cut too small for this box");

  InteractionMatrix m;
  m.nx = g.nx;
  m.ny = g.ny;
  m.k = d.phase_count();
  m.h = g.h;
  m.params = p;
  m.offs.assign(static_cast<std::size_t>(g.nx) * g.ny, 0.0);
  m.region.assign(static_cast<std::size_t>(g.cell_count()) * m.k, 0.0);
  m.cell_tail_bound =
      (p.r_cut >= 1e290) ? 0.0 : point_tail_bound(g.h * g.h, p.r_cut, p.s);

  parallel_for(
      static_cast<int>(m.offs.size()),
      [&](int oi) {
        if (oi == 0) return;
        int di = oi % g.nx, dj = oi / g.nx;
        m.offs[static_cast<std::size_t>(oi)] = j_cells(di * g.h, dj * g.h, g.h, p.s, p.quad_tol);
      },
      p.threads);

  parallel_for(
      g.cell_count(),
      [&](int c) {
        if (!g.interior[static_cast<std::size_t>(c)]) return;
        for (int j = 0; j < m.k; ++j) {
          RegionCoupling rc = j_cell_region(g, c, d.regions[static_cast<std::size_t>(j)], p.s,
                                            p.r_cut, p.quad_tol);
          m.region[static_cast<std::size_t>(c) * m.k + j] = rc.value;
        }
      },
      p.threads);
  return m;
}

// Weighted energy over a label field. Labels cover every cell; only
// interior cells may be relabeled, the rest are frozen at the datum.
class EnergyModel {
 public:
  EnergyModel(const Grid& g, const InteractionMatrix& m, std::vector<double> weights)
      : g_(&g), m_(&m), c_(std::move(weights)) {
    if (static_cast<int>(c_.size()) != m.k)
      throw std::invalid_argument("EnergyModel: one weight per phase required");
    for (double w : c_)
      if (!(w > 0.0)) throw std::invalid_argument("EnergyModel: weights must be positive");
    double cmax = 0.0;
    for (double w : c_) cmax = std::max(cmax, w);
    eps_flip_ = 1e-12 * cmax * (m.offs[1] + m.offs[static_cast<std::size_t>(m.nx)]);
  }

  double coupling_weight(int p, int q) const { return p == q ? 0.0 : c_[static_cast<std::size_t>(p)] + c_[static_cast<std::size_t>(q)]; }
  double flip_threshold() const { return eps_flip_; }
  int phase_count() const { return m_->k; }
  const std::vector<double>& weights() const { return c_; }

  double total(const std::vector<std::uint8_t>& lab) const {
    const int n = g_->cell_count();
    NeumaierSum e;
    for (int a = 0; a < n; ++a) {
      bool ia = g_->interior[static_cast<std::size_t>(a)];
      for (int b = a + 1; b < n; ++b) {
        if (!ia && !g_->interior[static_cast<std::size_t>(b)]) continue;
        double w = coupling_weight(lab[static_cast<std::size_t>(a)], lab[static_cast<std::size_t>(b)]);
        if (w != 0.0) e.add(w * m_->pair(a, b));
      }
      if (ia)
        for (int j = 0; j < m_->k; ++j)
          e.add(coupling_weight(lab[static_cast<std::size_t>(a)], j) *
                m_->region[static_cast<std::size_t>(a) * m_->k + j]);
    }
    return e.value();
  }

  // energy change from relabeling interior cell a to phase q
  double flip_delta(const std::vector<std::uint8_t>& lab, int a, int q) const {
    int p = lab[static_cast<std::size_t>(a)];
    if (p == q) return 0.0;
    const int n = g_->cell_count();
    thread_local std::vector<double> mass;
    mass.assign(static_cast<std::size_t>(m_->k), 0.0);
    for (int b = 0; b < n; ++b) {
      if (b == a) continue;
      mass[lab[static_cast<std::size_t>(b)]] += m_->pair(a, b);
    }
    for (int j = 0; j < m_->k; ++j)
      mass[static_cast<std::size_t>(j)] += m_->region[static_cast<std::size_t>(a) * m_->k + j];
    double delta = 0.0;
    for (int j = 0; j < m_->k; ++j)
      delta += (coupling_weight(q, j) - coupling_weight(p, j)) * mass[static_cast<std::size_t>(j)];
    return delta;
  }

  // per-phase perimeter shares: sum_i c_i * per[i] == total(lab)
  std::vector<double> phase_perimeters(const std::vector<std::uint8_t>& lab) const {
    const int n = g_->cell_count();
    std::vector<NeumaierSum> per(static_cast<std::size_t>(m_->k));
    for (int a = 0; a < n; ++a) {
      bool ia = g_->interior[static_cast<std::size_t>(a)];
      int p = lab[static_cast<std::size_t>(a)];
      for (int b = a + 1; b < n; ++b) {
        if (!ia && !g_->interior[static_cast<std::size_t>(b)]) continue;
        int q = lab[static_cast<std::size_t>(b)];
        if (p == q) continue;
        double v = m_->pair(a, b);
        per[static_cast<std::size_t>(p)].add(v);
        per[static_cast<std::size_t>(q)].add(v);
      }
      if (ia)
        for (int j = 0; j < m_->k; ++j) {
          if (j == p) continue;
          double v = m_->region[static_cast<std::size_t>(a) * m_->k + j];
          per[static_cast<std::size_t>(p)].add(v);
          per[static_cast<std::size_t>(j)].add(v);
        }
    }
    std::vector<double> out(static_cast<std::size_t>(m_->k));
    for (int j = 0; j < m_->k; ++j) out[static_cast<std::size_t>(j)] = per[static_cast<std::size_t>(j)].value();
    return out;
  }

  double tail_energy_bound() const {
    double cmax = 0.0;
    for (double w : c_) cmax = std::max(cmax, w);
    int interior = 0;
    for (std::uint8_t f : g_->interior) interior += f;
    return 2.0 * cmax * interior * m_->cell_tail_bound;
  }

 private:
  const Grid* g_;
  const InteractionMatrix* m_;
  std::vector<double> c_;
  double eps_flip_ = 0.0;
};

}  // namespace fracluster
