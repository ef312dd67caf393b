// Matrix-Lie-algebra-valued discrete differential forms on cubical grids.
//
// A k-cochain stores one m x m matrix per oriented k-cell, in lexicographic
// cell order; values carry units of (field) * h^k, i.e. they are integrals
// over cells.  Storage is an (m*m) x num_cells matrix whose columns are the
// cell matrices flattened row-major, so a column maps directly onto the
// binary file payload.
#pragma once

#include <bit>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gaugedec/algebra.hpp"
#include "gaugedec/grid.hpp"

namespace gaugedec {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Cochain {
  const Grid* grid = nullptr;
  int degree = 0;
  LieAlgebra algebra{1, Flavor::u1};
  Eigen::MatrixXd values;  // (m*m) x num_cells

  int cells() const { return static_cast<int>(values.cols()); }
  int m() const { return algebra.m(); }

  Eigen::Map<const RowMat> mat(int cell) const {
    return Eigen::Map<const RowMat>(values.col(cell).data(), m(), m());
  }
  void set_mat(int cell, const Mat& A) {
    Eigen::Map<RowMat>(values.col(cell).data(), m(), m()) = A;
  }

  Cochain& operator+=(const Cochain& o) {
    require_compatible(o);
    values += o.values;
    return *this;
  }
  Cochain& operator-=(const Cochain& o) {
    require_compatible(o);
    values -= o.values;
    return *this;
  }
  Cochain& operator*=(double s) {
    values *= s;
    return *this;
  }

  void require_compatible(const Cochain& o) const {
    if (grid != o.grid || degree != o.degree || m() != o.m())
      throw std::invalid_argument("cochain grid/degree/algebra mismatch");
  }
};

inline Cochain zero_cochain(const Grid& g, int k, const LieAlgebra& alg) {
  Cochain c;
  c.grid = &g;
  c.degree = k;
  c.algebra = alg;
  c.values = Eigen::MatrixXd::Zero(alg.m() * alg.m(), g.num_cells(k));
  return c;
}

inline Cochain operator+(Cochain a, const Cochain& b) { return a += b; }
inline Cochain operator-(Cochain a, const Cochain& b) { return a -= b; }
inline Cochain operator*(double s, Cochain a) { return a *= s; }

// Midpoint sampling of a smooth k-form density: value = f(center, mask) * h^k.
inline Cochain sample_cochain(const Grid& g, int k, const LieAlgebra& alg,
                              const std::function<Mat(const std::array<double, 3>&, unsigned)>& density) {
  Cochain c = zero_cochain(g, k, alg);
  double hk = std::pow(g.spacing(), k);
  for (int i = 0; i < g.num_cells(k); ++i) {
    int si;
    std::array<int, 3> pos;
    g.decode(k, i, si, pos);
    c.set_mat(i, density(g.center(k, i), g.subset_mask(k, si)) * hk);
  }
  return c;
}

// --- exterior derivative -----------------------------------------------------

inline Cochain exterior_d(const Cochain& a) {
  const Grid& g = *a.grid;
  if (a.degree >= g.dimension())
    throw std::invalid_argument("exterior derivative of a top-degree cochain");
  Cochain r = zero_cochain(g, a.degree + 1, a.algebra);
  SpMat D = g.coboundary(a.degree);
  r.values = a.values * D.transpose();
  return r;
}

// --- codifferential ----------------------------------------------------------

// Metric adjoint of d in the weighted flat L2 pairing:
// d* = h^{-2} W_{k-1}^{-1} D^T W_k.  On a torus all weights are 1 and this
// reduces to h^{-2} D^T, which coincides with +-star d star.
inline Cochain codifferential(const Cochain& a) {
  const Grid& g = *a.grid;
  if (a.degree <= 0) throw std::invalid_argument("codifferential of a 0-cochain");
  Cochain r = zero_cochain(g, a.degree - 1, a.algebra);
  SpMat D = g.coboundary(a.degree - 1);
  if (g.topology() == Topology::torus) {
    r.values = (a.values * D) / (g.spacing() * g.spacing());
    return r;
  }
  Eigen::MatrixXd weighted = a.values;
  for (int i = 0; i < a.cells(); ++i) weighted.col(i) *= g.cell_weight(a.degree, i);
  r.values = (weighted * D) / (g.spacing() * g.spacing());
  for (int i = 0; i < r.cells(); ++i) r.values.col(i) /= g.cell_weight(a.degree - 1, i);
  return r;
}

// --- Hodge star --------------------------------------------------------------

// Diagonal star on the periodic flat grid: the dual of a k-cell with
// direction set S is the (n-k)-cell with direction set S^c at the same
// position, scaled by h^{n-2k} and the shuffle sign of (S, S^c).
// On a box the dual complex leaves the primal index space, so the star is a
// torus-only operation; the codifferential above covers boxes directly.
inline Cochain hodge_star(const Cochain& a) {
  const Grid& g = *a.grid;
  if (g.topology() != Topology::torus)
    throw std::invalid_argument("hodge_star requires periodic topology");
  int n = g.dimension(), k = a.degree;
  Cochain r = zero_cochain(g, n - k, a.algebra);
  double scale = std::pow(g.spacing(), n - 2 * k);
  unsigned full = (1u << n) - 1u;
  for (int si = 0; si < g.num_subsets(k); ++si) {
    unsigned mask = g.subset_mask(k, si);
    unsigned cmask = full & ~mask;
    int ti = g.subset_id(n - k, cmask);
    double sgn = g.complement_sign(mask);
    int count = g.subset_cell_count(k, si);
    for (int c = 0; c < count; ++c) {
      int src = g.subset_offset(k, si) + c;
      int si2;
      std::array<int, 3> pos;
      g.decode(k, src, si2, pos);
      r.values.col(g.cell_index(n - k, ti, pos)) = sgn * scale * a.values.col(src);
    }
  }
  return r;
}

// L2 pairing <a,b> = sum_cells w_c h^{n-2k} tr(a^T b), with w_c the
// trapezoidal boundary weight; equals the star pairing sum tr(a^T star b)
// with the shuffle-sign convention above on the torus.
inline double inner_product(const Cochain& a, const Cochain& b) {
  a.require_compatible(b);
  const Grid& g = *a.grid;
  double scale = std::pow(g.spacing(), g.dimension() - 2 * a.degree);
  if (g.topology() == Topology::torus)
    return scale * a.values.cwiseProduct(b.values).sum();
  double s = 0.0;
  for (int i = 0; i < a.cells(); ++i)
    s += g.cell_weight(a.degree, i) * a.values.col(i).dot(b.values.col(i));
  return scale * s;
}

inline double l2_norm(const Cochain& a) { return std::sqrt(inner_product(a, a)); }

// L^p norm with Frobenius matrix norm:
// (sum_cells w_c h^n |value / h^k|_F^p)^{1/p}.
inline double lp_norm(const Cochain& a, double p) {
  if (p < 1.0) throw std::invalid_argument("lp_norm requires p >= 1");
  const Grid& g = *a.grid;
  double hn = std::pow(g.spacing(), g.dimension());
  double hk = std::pow(g.spacing(), a.degree);
  double s = 0.0;
  for (int i = 0; i < a.cells(); ++i)
    s += g.cell_weight(a.degree, i) * hn * std::pow(a.values.col(i).norm() / hk, p);
  return std::pow(s, 1.0 / p);
}

// --- wedge product -----------------------------------------------------------

// Cubical cup product, symmetrized over the front/back face convention so
// that scalar 1-forms anticommute exactly and the matrix product supplies
// the Lie structure.  For a (k+l)-cell with direction set S and each
// splitting S = S1 u S2:
//   1/2 * rho(S1,S2) * [ a(S1@pos) b(S2@pos+sh(S1)) + a(S1@pos+sh(S2)) b(S2@pos) ]
// where sh(T) shifts one step along every axis of T and rho is the shuffle
// sign.
inline Cochain wedge(const Cochain& a, const Cochain& b) {
  const Grid& g = *a.grid;
  if (b.grid != a.grid) throw std::invalid_argument("wedge operands on different grids");
  if (a.m() != b.m()) throw std::invalid_argument("wedge operands algebra mismatch");
  int k = a.degree, l = b.degree, n = g.dimension();
  if (k + l > n) throw std::invalid_argument("wedge degree overflow");
  Cochain r = zero_cochain(g, k + l, a.algebra);
  int mm = a.m();

  for (int si = 0; si < g.num_subsets(k + l); ++si) {
    unsigned mask = g.subset_mask(k + l, si);
    // enumerate sub-subsets S1 of `mask` with |S1| = k
    std::vector<int> axes;
    for (int ax = 0; ax < n; ++ax)
      if (mask >> ax & 1u) axes.push_back(ax);
    int nb = static_cast<int>(axes.size());
    for (unsigned pick = 0; pick < (1u << nb); ++pick) {
      if (std::popcount(pick) != k) continue;
      unsigned m1 = 0, m2 = 0;
      for (int i = 0; i < nb; ++i) ((pick >> i & 1u) ? m1 : m2) |= 1u << axes[i];
      // shuffle sign: inversions between S1 and S2
      int inv = 0;
      for (int x = 0; x < n; ++x)
        if (m1 >> x & 1u)
          for (int y = 0; y < x; ++y)
            if (m2 >> y & 1u) ++inv;
      double rho = (inv % 2 == 0) ? 0.5 : -0.5;
      int s1 = g.subset_id(k, m1), s2 = g.subset_id(l, m2);
      int count = g.subset_cell_count(k + l, si);
      Mat A(mm, mm), B(mm, mm);
      for (int c = 0; c < count; ++c) {
        int cell = g.subset_offset(k + l, si) + c;
        int tsi;
        std::array<int, 3> pos;
        g.decode(k + l, cell, tsi, pos);
        std::array<int, 3> p_sh1 = pos, p_sh2 = pos;
        for (int x = 0; x < n; ++x) {
          if (m1 >> x & 1u) p_sh1[x] += 1;
          if (m2 >> x & 1u) p_sh2[x] += 1;
        }
        Eigen::Map<const RowMat> a_front(a.values.col(g.cell_index(k, s1, pos)).data(), mm, mm);
        Eigen::Map<const RowMat> b_back(b.values.col(g.cell_index(l, s2, p_sh1)).data(), mm, mm);
        Eigen::Map<const RowMat> a_back(a.values.col(g.cell_index(k, s1, p_sh2)).data(), mm, mm);
        Eigen::Map<const RowMat> b_front(b.values.col(g.cell_index(l, s2, pos)).data(), mm, mm);
        A = a_front * b_back + a_back * b_front;
        Eigen::Map<RowMat> out(r.values.col(cell).data(), mm, mm);
        out += rho * A;
      }
    }
  }
  return r;
}

// Projection of a cochain onto the exact discrete harmonic fields:
// direction-class constants on the torus, the (weighted-mean) constant for
// box 0-forms, zero on a box for k >= 1.
inline Cochain harmonic_component(const Cochain& a) {
  const Grid& g = *a.grid;
  Cochain eta = zero_cochain(g, a.degree, a.algebra);
  if (g.topology() == Topology::box) {
    if (a.degree != 0) return eta;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(a.values.rows());
    double wsum = 0.0;
    for (int c = 0; c < a.cells(); ++c) {
      double w = g.cell_weight(0, c);
      mean += w * a.values.col(c);
      wsum += w;
    }
    mean /= wsum;
    for (int c = 0; c < a.cells(); ++c) eta.values.col(c) = mean;
    return eta;
  }
  for (int si = 0; si < g.num_subsets(a.degree); ++si) {
    int off = g.subset_offset(a.degree, si);
    int cnt = g.subset_cell_count(a.degree, si);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(a.values.rows());
    for (int c = 0; c < cnt; ++c) mean += a.values.col(off + c);
    mean /= cnt;
    for (int c = 0; c < cnt; ++c) eta.values.col(off + c) = mean;
  }
  return eta;
}

// --- curvature ---------------------------------------------------------------

// F(Omega) = d Omega + Omega ^ Omega; the one discrete curvature used by
// every module.
inline Cochain curvature(const Cochain& omega) {
  if (omega.degree != 1) throw std::invalid_argument("curvature expects a 1-cochain");
  Cochain f = exterior_d(omega);
  f += wedge(omega, omega);
  return f;
}

// --- mollification -----------------------------------------------------------

// Componentwise convolution with a normalized discrete Gaussian of standard
// deviation eps (length units), separable along grid axes.  Near a box
// boundary the clipped kernel is renormalized, so constants are preserved.
inline Cochain mollify(const Cochain& a, double eps) {
  if (eps < 0.0) throw std::invalid_argument("mollify width must be nonnegative");
  const Grid& g = *a.grid;
  double sigma = eps / g.spacing();  // in cells
  if (sigma < 1e-12) return a;
  int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  for (int d = -radius; d <= radius; ++d)
    kernel[d + radius] = std::exp(-0.5 * (d / sigma) * (d / sigma));

  Cochain r = a;
  bool periodic = g.topology() == Topology::torus;
  int k = a.degree, n = g.dimension(), mm2 = a.m() * a.m();

  for (int si = 0; si < g.num_subsets(k); ++si) {
    unsigned mask = g.subset_mask(k, si);
    std::array<int, 3> len = {1, 1, 1};
    for (int ax = 0; ax < n; ++ax) len[ax] = g.axis_len(ax, mask >> ax & 1u);
    for (int ax = 0; ax < n; ++ax) {
      int L = len[ax];
      // stride of axis `ax` in the row-major position index
      int stride = 1;
      for (int b = ax + 1; b < n; ++b) stride *= len[b];
      int lines = 1;
      for (int b = 0; b < n; ++b)
        if (b != ax) lines *= len[b];
      std::vector<double> in(L), out(L);
      for (int slot = 0; slot < mm2; ++slot) {
        for (int line = 0; line < lines; ++line) {
          // base index of this line (position 0 along `ax`)
          int rem = line, base = 0;
          for (int b = n - 1; b >= 0; --b) {
            if (b == ax) continue;
            int p = rem % len[b];
            rem /= len[b];
            int str = 1;
            for (int bb = b + 1; bb < n; ++bb) str *= len[bb];
            base += p * str;
          }
          for (int i = 0; i < L; ++i)
            in[i] = r.values(slot, g.subset_offset(k, si) + base + i * stride);
          for (int i = 0; i < L; ++i) {
            double acc = 0.0, wsum = 0.0;
            for (int d = -radius; d <= radius; ++d) {
              int j = i + d;
              if (periodic)
                j = ((j % L) + L) % L;
              else if (j < 0 || j >= L)
                continue;
              acc += kernel[d + radius] * in[j];
              wsum += kernel[d + radius];
            }
            out[i] = acc / wsum;
          }
          for (int i = 0; i < L; ++i)
            r.values(slot, g.subset_offset(k, si) + base + i * stride) = out[i];
        }
      }
    }
  }
  return r;
}

}  // namespace gaugedec
