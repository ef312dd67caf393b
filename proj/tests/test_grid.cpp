#include "doctest.h"

#include "gaugedec/grid.hpp"
#include "gaugedec/random.hpp"

#include <Eigen/Dense>

using namespace gaugedec;

namespace {

// Brute-force cell enumeration: count (direction subset, position) pairs
// directly, independent of the Grid index tables.
int brute_force_cell_count(int n, std::array<int, 3> counts, Topology topo, int k) {
  std::vector<int> axes(n);
  int total = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    int bits = 0;
    for (int a = 0; a < n; ++a) bits += mask >> a & 1;
    if (bits != k) continue;
    int prod = 1;
    for (int a = 0; a < n; ++a) {
      bool extends = mask >> a & 1;
      prod *= (extends || topo == Topology::torus) ? counts[a] : counts[a] + 1;
    }
    total += prod;
  }
  return total;
}

}  // namespace

TEST_CASE("cell counts match combinatorial formulas") {
  Grid t44(2, {4, 4, 1}, 0.25, Topology::torus);
  CHECK(t44.num_cells(0) == 16);
  CHECK(t44.num_cells(1) == 32);
  CHECK(t44.num_cells(2) == 16);

  Grid b22(2, {2, 2, 1}, 0.5, Topology::box);
  CHECK(b22.num_cells(0) == 9);
  CHECK(b22.num_cells(1) == 12);
  CHECK(b22.num_cells(2) == 4);

  Grid t444(3, {4, 4, 4}, 0.25, Topology::torus);
  CHECK(t444.num_cells(1) == 192);
  CHECK(t444.num_cells(2) == 192);
  for (int k = 0; k <= 3; ++k)
    CHECK(t444.num_cells(k) == brute_force_cell_count(3, {4, 4, 4}, Topology::torus, k));

  Grid b342(3, {3, 4, 2}, 0.1, Topology::box);
  for (int k = 0; k <= 3; ++k)
    CHECK(b342.num_cells(k) == brute_force_cell_count(3, {3, 4, 2}, Topology::box, k));
}

TEST_CASE("construction rejects bad input") {
  CHECK_THROWS(Grid(1, {4, 4, 1}, 0.25, Topology::torus));
  CHECK_THROWS(Grid(4, {4, 4, 4}, 0.25, Topology::torus));
  CHECK_THROWS(Grid(2, {4, 4, 1}, 0.0, Topology::torus));
  CHECK_THROWS(Grid(2, {4, 4, 1}, -1.0, Topology::torus));
  CHECK_THROWS(Grid(2, {1, 4, 1}, 0.25, Topology::box));
}

TEST_CASE("cell index round trip") {
  for (Topology topo : {Topology::box, Topology::torus}) {
    Grid g(3, {3, 4, 5}, 0.2, topo);
    for (int k = 0; k <= 3; ++k) {
      for (int i = 0; i < g.num_cells(k); ++i) {
        int si;
        std::array<int, 3> pos;
        g.decode(k, i, si, pos);
        CHECK(g.cell_index(k, si, pos) == i);
      }
    }
  }
}

TEST_CASE("every (k+1)-cell has exactly 2(k+1) facets with signs +-1") {
  for (Topology topo : {Topology::box, Topology::torus}) {
    Grid g(3, {3, 3, 3}, 0.5, topo);
    for (int k = 0; k < 3; ++k) {
      SpMat D = g.coboundary(k);
      std::vector<int> rownnz(D.rows(), 0);
      std::vector<double> rowsum(D.rows(), 0.0);
      for (int c = 0; c < D.outerSize(); ++c)
        for (SpMat::InnerIterator it(D, c); it; ++it) {
          rownnz[it.row()]++;
          rowsum[it.row()] += it.value();
          CHECK(std::abs(it.value()) == 1.0);
        }
      for (int rw = 0; rw < D.rows(); ++rw) {
        CHECK(rownnz[rw] == 2 * (k + 1));
        CHECK(rowsum[rw] == 0.0);
      }
    }
  }
}

TEST_CASE("torus N=4 k=0 coboundary rows have one +1 and one -1") {
  Grid g(2, {4, 4, 1}, 0.25, Topology::torus);
  SpMat D = g.coboundary(0);
  std::vector<double> rowmin(D.rows(), 0.0), rowmax(D.rows(), 0.0);
  std::vector<int> rownnz(D.rows(), 0);
  for (int c = 0; c < D.outerSize(); ++c)
    for (SpMat::InnerIterator it(D, c); it; ++it) {
      rownnz[it.row()]++;
      rowmin[it.row()] = std::min(rowmin[it.row()], it.value());
      rowmax[it.row()] = std::max(rowmax[it.row()], it.value());
    }
  for (int r = 0; r < D.rows(); ++r) {
    CHECK(rownnz[r] == 2);
    CHECK(rowmin[r] == -1.0);
    CHECK(rowmax[r] == 1.0);
  }
}

TEST_CASE("d compose d is the zero operator, exactly") {
  for (Topology topo : {Topology::box, Topology::torus}) {
    for (int n : {2, 3}) {
      Grid g(n, {4, 3, 5}, 0.25, topo);
      for (int k = 0; k + 1 < n; ++k) {
        SpMat DD = g.coboundary(k + 1) * g.coboundary(k);
        double absmax = 0.0;
        for (int c = 0; c < DD.outerSize(); ++c)
          for (SpMat::InnerIterator it(DD, c); it; ++it)
            absmax = std::max(absmax, std::abs(it.value()));
        CHECK(absmax == 0.0);
      }
    }
  }
}

TEST_CASE("boundary compose boundary is the zero operator, exactly") {
  Grid g(3, {3, 4, 3}, 0.25, Topology::box);
  for (int k = 0; k + 1 < 3; ++k) {
    SpMat B = SpMat(g.coboundary(k).transpose()) * SpMat(g.coboundary(k + 1).transpose());
    double absmax = 0.0;
    for (int c = 0; c < B.outerSize(); ++c)
      for (SpMat::InnerIterator it(B, c); it; ++it) absmax = std::max(absmax, std::abs(it.value()));
    CHECK(absmax == 0.0);
  }
}

TEST_CASE("box 2x2 plaquette row matches the hand-enumerated 4-term loop") {
  Grid g(2, {2, 2, 1}, 0.5, Topology::box);
  SpMat D = g.coboundary(1);
  // plaquette at (0,0): +bottom, +right, -top, -left with the lex edge ids
  // {0}-edges first (2 x 3 of them), then {1}-edges (3 x 2)
  int bottom = 0;           // ({0}, (0,0))
  int top = 1;              // ({0}, (0,1))
  int left = 6;             // ({1}, (0,0))
  int right = 6 + 2;        // ({1}, (1,0))
  Eigen::VectorXd row = Eigen::VectorXd::Zero(D.cols());
  for (int c = 0; c < D.outerSize(); ++c)
    for (SpMat::InnerIterator it(D, c); it; ++it)
      if (it.row() == 0) row[it.col()] = it.value();
  CHECK(row[bottom] == 1.0);
  CHECK(row[right] == 1.0);
  CHECK(row[top] == -1.0);
  CHECK(row[left] == -1.0);
  CHECK(row.cwiseAbs().sum() == 4.0);
}

TEST_CASE("trace mask classification") {
  Grid torus(2, {4, 4, 1}, 0.25, Topology::torus);
  TraceMask mt = trace_mask(torus);
  for (int k = 0; k <= 2; ++k) CHECK(mt.cells[k].empty());

  Grid b(2, {2, 2, 1}, 0.5, Topology::box);
  TraceMask mb = trace_mask(b);
  CHECK(mb.count(0, TraceClass::tangential) == 8);
  CHECK(mb.count(0, TraceClass::normal) == 0);
  CHECK(mb.count(1, TraceClass::tangential) == 8);
  CHECK(mb.count(1, TraceClass::normal) == 4);
  CHECK(mb.count(2, TraceClass::tangential) == 0);
  CHECK(mb.count(2, TraceClass::normal) == 4);

  // dimension after normal-trace elimination = interior plaquette count
  CHECK(free_cells(b, 2, mb).size() == 0);
  Grid b4(2, {4, 4, 1}, 0.25, Topology::box);
  CHECK(free_cells(b4, 2, trace_mask(b4)).size() == 4);

  // refining a box by 2x doubles the boundary (tangential) edge count
  Grid b8(2, {8, 8, 1}, 0.125, Topology::box);
  CHECK(trace_mask(b8).count(1, TraceClass::tangential) ==
        2 * trace_mask(b4).count(1, TraceClass::tangential));
}

TEST_CASE("grid descriptor serializes the contract fields") {
  Grid g(2, {4, 4, 1}, 0.25, Topology::torus);
  std::string j = g.descriptor_json();
  CHECK(j.find("\"n\":2") != std::string::npos);
  CHECK(j.find("\"counts\":[4,4]") != std::string::npos);
  CHECK(j.find("\"topology\":\"torus\"") != std::string::npos);
  CHECK(j.find("\"ordering\":\"lex\"") != std::string::npos);
}
