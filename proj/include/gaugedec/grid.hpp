// Flat cubical cell complexes: box domains with boundary and periodic tori.
//
// Cells of degree k are axis-aligned k-cubes, identified by a direction
// subset S (the axes along which the cell extends) and an integer position.
// Ordering is lexicographic and is part of the file-format contract:
// direction subsets are enumerated as sorted axis tuples in lexicographic
// order, and within a subset positions are row-major with the last axis
// fastest.
#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

namespace gaugedec {

using SpMat = Eigen::SparseMatrix<double>;

enum class Topology { box, torus };

inline std::string to_string(Topology t) { return t == Topology::box ? "box" : "torus"; }

// Binomial coefficients for n <= 3 are all we ever need.
inline int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  int r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

class Grid {
public:
  Grid(int n, std::array<int, 3> counts, double h, Topology topology)
      : n_(n), counts_(counts), h_(h), topology_(topology) {
    if (n != 2 && n != 3) throw std::invalid_argument("grid dimension must be 2 or 3");
    if (h <= 0.0) throw std::invalid_argument("grid spacing must be positive");
    for (int a = 0; a < n; ++a)
      if (counts_[a] < 2) throw std::invalid_argument("need at least 2 cells per axis");
    for (int a = n; a < 3; ++a) counts_[a] = 1;
    build_tables();
  }

  int dimension() const { return n_; }
  double spacing() const { return h_; }
  Topology topology() const { return topology_; }
  const std::array<int, 3>& counts() const { return counts_; }

  // Number of positions along axis `a` for a cell extending (or not) along it.
  int axis_len(int a, bool extends) const {
    if (extends || topology_ == Topology::torus) return counts_[a];
    return counts_[a] + 1;
  }

  int num_subsets(int k) const { return binomial(n_, k); }
  // Direction subset as a bitmask over axes; subsets listed in lexicographic
  // order of their sorted axis tuples.
  unsigned subset_mask(int k, int si) const { return subsets_[k][si]; }

  int num_cells(int k) const {
    check_degree(k);
    return totals_[k];
  }

  int subset_offset(int k, int si) const { return offsets_[k][si]; }

  int subset_cell_count(int k, int si) const {
    int c = 1;
    for (int a = 0; a < n_; ++a) c *= axis_len(a, subsets_[k][si] >> a & 1u);
    return c;
  }

  int cell_index(int k, int si, const std::array<int, 3>& pos) const {
    unsigned mask = subsets_[k][si];
    int idx = 0;
    for (int a = 0; a < n_; ++a) {
      int len = axis_len(a, mask >> a & 1u);
      int p = pos[a];
      if (topology_ == Topology::torus) p = ((p % len) + len) % len;
      idx = idx * len + p;
    }
    return offsets_[k][si] + idx;
  }

  // Inverse of cell_index.
  void decode(int k, int idx, int& si, std::array<int, 3>& pos) const {
    si = 0;
    while (si + 1 < num_subsets(k) && idx >= offsets_[k][si + 1]) ++si;
    int rem = idx - offsets_[k][si];
    unsigned mask = subsets_[k][si];
    for (int a = n_ - 1; a >= 0; --a) {
      int len = axis_len(a, mask >> a & 1u);
      pos[a] = rem % len;
      rem /= len;
    }
    for (int a = n_; a < 3; ++a) pos[a] = 0;
  }

  // Coordinates of the cell's low corner, in length units.
  std::array<double, 3> low_corner(int k, int idx) const {
    int si;
    std::array<int, 3> pos;
    decode(k, idx, si, pos);
    return {pos[0] * h_, pos[1] * h_, pos[2] * h_};
  }

  // Midpoint of the cell, in length units.
  std::array<double, 3> center(int k, int idx) const {
    int si;
    std::array<int, 3> pos;
    decode(k, idx, si, pos);
    unsigned mask = subsets_[k][si];
    std::array<double, 3> c{};
    for (int a = 0; a < 3; ++a) c[a] = pos[a] * h_ + ((mask >> a & 1u) ? 0.5 * h_ : 0.0);
    return c;
  }

  // Trapezoidal quadrature weight of a k-cell in the L2 pairing: 1/2 per
  // point-axis sitting on a box wall, 1 otherwise.  Every weight is 1 on a
  // torus.  Keeps the discrete inner product second-order consistent at the
  // boundary, which the Poincare-constant accuracy relies on.
  double cell_weight(int k, int idx) const {
    if (topology_ == Topology::torus) return 1.0;
    int si;
    std::array<int, 3> pos;
    decode(k, idx, si, pos);
    unsigned mask = subsets_[k][si];
    double w = 1.0;
    for (int a = 0; a < n_; ++a) {
      if (mask >> a & 1u) continue;
      if (pos[a] == 0 || pos[a] == counts_[a]) w *= 0.5;
    }
    return w;
  }

  // Signed incidence operator from k-cochains to (k+1)-cochains.
  // Row pattern: every (k+1)-cell has exactly 2(k+1) facet entries, signs +-1.
  SpMat coboundary(int k) const {
    if (k < 0 || k >= n_) throw std::invalid_argument("coboundary degree out of range");
    SpMat D(num_cells(k + 1), num_cells(k));
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(num_cells(k + 1)) * 2 * (k + 1));
    for (int si = 0; si < num_subsets(k + 1); ++si) {
      unsigned mask = subsets_[k + 1][si];
      int count = subset_cell_count(k + 1, si);
      for (int c = 0; c < count; ++c) {
        int row = offsets_[k + 1][si] + c;
        int tmp_si;
        std::array<int, 3> pos;
        decode(k + 1, row, tmp_si, pos);
        int below = 0;  // axes of `mask` below `a`
        for (int a = 0; a < n_; ++a) {
          if (!(mask >> a & 1u)) continue;
          double sgn = (below % 2 == 0) ? 1.0 : -1.0;
          unsigned fmask = mask & ~(1u << a);
          int fsi = subset_id(k, fmask);
          std::array<int, 3> up = pos;
          up[a] += 1;
          trips.emplace_back(row, cell_index(k, fsi, pos), -sgn);
          trips.emplace_back(row, cell_index(k, fsi, up), sgn);
          ++below;
        }
      }
    }
    D.setFromTriplets(trips.begin(), trips.end());
    return D;
  }

  int subset_id(int k, unsigned mask) const {
    for (int si = 0; si < num_subsets(k); ++si)
      if (subsets_[k][si] == mask) return si;
    throw std::logic_error("unknown direction subset");
  }

  // Shuffle sign of the complementary subset: sign of the permutation that
  // sorts (S, S^c).  Drives the Hodge star orientation.
  double complement_sign(unsigned mask) const {
    int inv = 0;
    for (int a = 0; a < n_; ++a) {
      if (!(mask >> a & 1u)) continue;
      for (int b = 0; b < a; ++b)
        if (!(mask >> b & 1u)) ++inv;
    }
    return inv % 2 == 0 ? 1.0 : -1.0;
  }

  std::string descriptor_json() const {
    std::string s = "{\"n\":" + std::to_string(n_) + ",\"counts\":[";
    for (int a = 0; a < n_; ++a) s += (a ? "," : "") + std::to_string(counts_[a]);
    char hb[40];
    std::snprintf(hb, sizeof hb, "%.17g", h_);
    s += "],\"h\":";
    s += hb;
    s += ",\"topology\":\"" + to_string(topology_) + "\",\"ordering\":\"lex\"}";
    return s;
  }

  bool operator==(const Grid& o) const {
    return n_ == o.n_ && counts_ == o.counts_ && h_ == o.h_ && topology_ == o.topology_;
  }

private:
  void check_degree(int k) const {
    if (k < 0 || k > n_) throw std::invalid_argument("cochain degree out of range");
  }

  void build_tables() {
    subsets_.assign(n_ + 1, {});
    offsets_.assign(n_ + 1, {});
    totals_.assign(n_ + 1, 0);
    for (int k = 0; k <= n_; ++k) {
      // combinations of {0..n-1} of size k in lexicographic order
      std::vector<int> comb(k);
      for (int i = 0; i < k; ++i) comb[i] = i;
      while (true) {
        unsigned mask = 0;
        for (int i = 0; i < k; ++i) mask |= 1u << comb[i];
        subsets_[k].push_back(mask);
        int i = k - 1;
        while (i >= 0 && comb[i] == n_ - k + i) --i;
        if (i < 0) break;
        ++comb[i];
        for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
      }
      int off = 0;
      for (size_t si = 0; si < subsets_[k].size(); ++si) {
        offsets_[k].push_back(off);
        off += subset_cell_count(k, static_cast<int>(si));
      }
      totals_[k] = off;
    }
  }

  int n_;
  std::array<int, 3> counts_;
  double h_;
  Topology topology_;
  std::vector<std::vector<unsigned>> subsets_;
  std::vector<std::vector<int>> offsets_;
  std::vector<int> totals_;
};

inline Grid build_grid(int n, std::array<int, 3> counts, double h, Topology topology) {
  return Grid(n, counts, h, topology);
}

enum class TraceClass { tangential, normal };

// Boundary k-cells classified relative to the walls of a box domain.
// A cell touching the boundary is tangential when it lies inside a wall
// hyperplane and normal when it extends transversally into the domain.
struct TraceMask {
  // per degree: (cell index, class)
  std::vector<std::vector<std::pair<int, TraceClass>>> cells;

  int count(int k, TraceClass c) const {
    int r = 0;
    for (auto& [idx, cl] : cells[k])
      if (cl == c) ++r;
    return r;
  }

  std::vector<char> normal_flags(const Grid& g, int k) const {
    std::vector<char> f(g.num_cells(k), 0);
    for (auto& [idx, cl] : cells[k])
      if (cl == TraceClass::normal) f[idx] = 1;
    return f;
  }
};

inline TraceMask trace_mask(const Grid& g) {
  TraceMask mask;
  mask.cells.assign(g.dimension() + 1, {});
  if (g.topology() == Topology::torus) return mask;  // no boundary
  for (int k = 0; k <= g.dimension(); ++k) {
    for (int idx = 0; idx < g.num_cells(k); ++idx) {
      int si;
      std::array<int, 3> pos;
      g.decode(k, idx, si, pos);
      unsigned ms = g.subset_mask(k, si);
      bool tangential = false, touches = false;
      for (int a = 0; a < g.dimension(); ++a) {
        int N = g.counts()[a];
        if (ms >> a & 1u) {
          if (pos[a] == 0 || pos[a] == N - 1) touches = true;
        } else {
          if (pos[a] == 0 || pos[a] == N) tangential = true;
        }
      }
      if (tangential)
        mask.cells[k].emplace_back(idx, TraceClass::tangential);
      else if (touches)
        mask.cells[k].emplace_back(idx, TraceClass::normal);
    }
  }
  return mask;
}

// Indices of k-cells kept by the strong normal-trace elimination.
inline std::vector<int> free_cells(const Grid& g, int k, const TraceMask& mask) {
  auto normal = mask.normal_flags(g, k);
  std::vector<int> keep;
  keep.reserve(g.num_cells(k));
  for (int i = 0; i < g.num_cells(k); ++i)
    if (!normal[i]) keep.push_back(i);
  return keep;
}

}  // namespace gaugedec
