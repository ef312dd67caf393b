// Isometric immersion reconstruction from fundamental forms on a 2-d patch:
// assemble the Cartan connection form of the adapted orthonormal frame,
// check the structure and Gauss-Codazzi-Ricci equations distributionally,
// integrate the Pfaff system dP = -Omega P along a spanning tree, and
// integrate the immersion d iota = omega^T P.
//
// Frame convention: P rows are the moving-frame vectors in ambient
// coordinates (n tangents first, then the normals), and
//   Omega_ab = <f_a, d f_b>   (antisymmetric),
// so dP = -Omega P and the integrability condition is exactly
// curvature(Omega) = d Omega + Omega ^ Omega = 0.
#pragma once

#include <algorithm>
#include <queue>
#include <vector>

#include "gaugedec/cochain.hpp"
#include "gaugedec/elliptic.hpp"
#include "gaugedec/matfun.hpp"

namespace gaugedec {

struct ImmersionData {
  std::shared_ptr<Grid> grid;  // n = 2 box patch
  int codim = 1;
  // per-vertex fields, lexicographic vertex order
  std::vector<Mat> metric;                        // 2x2 SPD
  std::vector<std::vector<Mat>> second_fundamental;  // [vertex][alpha]: 2x2 symmetric, coordinate basis
  std::vector<std::array<Mat, 2>> normal_connection; // [vertex][axis]: codim x codim antisymmetric

  int vertices() const { return grid->num_cells(0); }

  void validate() const {
    if (grid->dimension() != 2 || grid->topology() != Topology::box)
      throw std::invalid_argument("immersion data lives on a 2-d box patch");
    for (const Mat& g : metric) {
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (g + g.transpose()));
      if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("immersion metric is not positive definite");
    }
    for (const auto& per_vertex : second_fundamental)
      for (const Mat& s : per_vertex)
        if ((s - s.transpose()).norm() > 1e-10 * (1.0 + s.norm()))
          throw std::invalid_argument("second fundamental form must be symmetric");
  }
};

struct CartanConnection {
  Cochain form;                 // so(n+codim)-valued 1-cochain
  std::vector<Cochain> coframe; // n+codim scalar 1-cochains; normal slots zero
  int codim = 1;
};

namespace detail {

// Orthonormal frame from the metric by Gram-Schmidt on the coordinate
// frame, deterministic column order: columns of B are the frame vectors'
// coordinate components, e_i = sum_l B(l,i) d/dx_l.
inline Mat frame_matrix(const Mat& g) {
  Mat B = Mat::Zero(2, 2);
  double n1 = std::sqrt(g(0, 0));
  B(0, 0) = 1.0 / n1;
  double c = g(0, 1) / g(0, 0);
  // v = d2 - c d1, |v|_g^2 = g22 - g12^2 / g11
  double n2 = std::sqrt(g(1, 1) - g(0, 1) * g(0, 1) / g(0, 0));
  B(0, 1) = -c / n2;
  B(1, 1) = 1.0 / n2;
  return B;
}

// Second-order difference of a per-vertex field along `axis`: centered in
// the interior, 3-point one-sided at the patch boundary.
template <typename Get>
inline auto d_vertex(const Grid& g, const Get& val, int vx, int vy, int axis)
    -> decltype(val(0, 0)) {
  int N0 = g.counts()[0], N1 = g.counts()[1];
  double h = g.spacing();
  int p = axis == 0 ? vx : vy, N = axis == 0 ? N0 : N1;
  auto at = [&](int q) { return axis == 0 ? val(q, vy) : val(vx, q); };
  if (p > 0 && p < N) return (at(p + 1) - at(p - 1)) / (2.0 * h);
  if (p == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  return (3.0 * at(N) - 4.0 * at(N - 1) + at(N - 2)) / (2.0 * h);
}

}  // namespace detail

// Pointwise value of the Cartan connection: Omega(d/dx_axis) at a vertex.
inline Mat cartan_pointwise(const ImmersionData& data, int vx, int vy, int axis) {
  const Grid& g = *data.grid;
  int N0 = g.counts()[0];
  auto vid = [&](int x, int y) { return x * (g.counts()[1] + 1) + y; };
  (void)N0;
  int kc = data.codim;
  int dim = 2 + kc;

  auto metric_at = [&](int x, int y) -> Mat { return data.metric[vid(x, y)]; };
  auto frame_at = [&](int x, int y) -> Mat { return detail::frame_matrix(data.metric[vid(x, y)]); };

  int v = vid(vx, vy);
  Mat gm = data.metric[v];
  Mat B = detail::frame_matrix(gm);
  Mat dB = detail::d_vertex(g, frame_at, vx, vy, axis);
  Mat dg[2] = {detail::d_vertex(g, metric_at, vx, vy, 0),
               detail::d_vertex(g, metric_at, vx, vy, 1)};

  // coordinate Christoffels Gamma^l_{axis,m}
  Mat ginv = gm.inverse();
  Mat Gamma = Mat::Zero(2, 2);  // (l, m)
  for (int l = 0; l < 2; ++l)
    for (int m = 0; m < 2; ++m) {
      double s = 0.0;
      for (int r = 0; r < 2; ++r)
        s += ginv(l, r) * (dg[axis](r, m) + dg[m](r, axis) - dg[r](axis, m));
      Gamma(l, m) = 0.5 * s;
    }

  // nabla_axis e_i = sum_l (dB(l,i) + sum_m B(m,i) Gamma^l_{axis,m}) d/dx_l
  Mat nabla = dB + Gamma * B;
  // tangent-tangent: Omega_ij = <e_i, nabla e_j>_g, antisymmetrized exactly
  Mat tt_raw = B.transpose() * gm * nabla;
  Mat tt = 0.5 * (tt_raw - tt_raw.transpose());

  Mat omega = Mat::Zero(dim, dim);
  omega.topLeftCorner(2, 2) = tt;
  for (int alpha = 0; alpha < kc; ++alpha) {
    const Mat& II = data.second_fundamental[v][alpha];
    for (int i = 0; i < 2; ++i) {
      // Omega_{i,alpha}(d_axis) = -II(e_i, d_axis) = -sum_l B(l,i) II(l,axis)
      double val = 0.0;
      for (int l = 0; l < 2; ++l) val -= B(l, i) * II(l, axis);
      omega(i, 2 + alpha) = val;
      omega(2 + alpha, i) = -val;
    }
  }
  if (kc > 0) {
    const Mat& theta = data.normal_connection[v][axis];
    omega.bottomRightCorner(kc, kc) = 0.5 * (theta - theta.transpose());
  }
  return omega;
}

inline CartanConnection assemble_cartan(const ImmersionData& data) {
  data.validate();
  const Grid& g = *data.grid;
  int kc = data.codim;
  int dim = 2 + kc;
  LieAlgebra so_alg(dim, Flavor::so);
  LieAlgebra scalar(1, Flavor::u1);

  CartanConnection cc;
  cc.codim = kc;
  cc.form = zero_cochain(g, 1, so_alg);
  cc.coframe.assign(dim, zero_cochain(g, 1, scalar));

  auto vid = [&](int x, int y) { return x * (g.counts()[1] + 1) + y; };
  double h = g.spacing();
  for (int e = 0; e < g.num_cells(1); ++e) {
    int si;
    std::array<int, 3> pos;
    g.decode(1, e, si, pos);
    int axis = g.subset_mask(1, si) == 1u ? 0 : 1;
    int tx = pos[0], ty = pos[1];
    int hx = tx + (axis == 0 ? 1 : 0), hy = ty + (axis == 1 ? 1 : 0);
    Mat wt = cartan_pointwise(data, tx, ty, axis);
    Mat wh = cartan_pointwise(data, hx, hy, axis);
    cc.form.set_mat(e, 0.5 * h * (wt + wh));

    Mat Bt = detail::frame_matrix(data.metric[vid(tx, ty)]);
    Mat Bh = detail::frame_matrix(data.metric[vid(hx, hy)]);
    Mat Bti = Bt.inverse(), Bhi = Bh.inverse();
    for (int i = 0; i < 2; ++i)
      cc.coframe[i].values(0, e) = 0.5 * h * (Bti(i, axis) + Bhi(i, axis));
  }
  return cc;
}

struct CompatibilityReport {
  double first_structure = 0.0;   // L2 of d omega^b + sum_a omega^a ^ Omega_ab
  double second_structure = 0.0;  // L2 of curvature(Omega)
  double gauss = 0.0;             // tangent-tangent block
  double codazzi = 0.0;           // tangent-normal block
  double ricci = 0.0;             // normal-normal block
};

inline CompatibilityReport compatibility_residuals(const ImmersionData& data) {
  CartanConnection cc = assemble_cartan(data);
  const Grid& g = *data.grid;
  int dim = 2 + cc.codim;
  CompatibilityReport rep;

  // first structure equation, componentwise scalar wedges
  double fs2 = 0.0;
  for (int b = 0; b < dim; ++b) {
    Cochain res = exterior_d(cc.coframe[b]);
    for (int a = 0; a < dim; ++a) {
      LieAlgebra scalar(1, Flavor::u1);
      Cochain oab = zero_cochain(g, 1, scalar);
      for (int e = 0; e < g.num_cells(1); ++e) oab.values(0, e) = cc.form.mat(e)(a, b);
      res += wedge(cc.coframe[a], oab);
    }
    double r = l2_norm(res);
    fs2 += r * r;
  }
  rep.first_structure = std::sqrt(fs2);

  Cochain F = curvature(cc.form);
  rep.second_structure = l2_norm(F);

  // block norms: Gauss (tangent-tangent), Codazzi (mixed), Ricci (normal)
  Cochain Fg = zero_cochain(g, 2, F.algebra), Fc = Fg, Fr = Fg;
  for (int c = 0; c < F.cells(); ++c) {
    Mat M = F.mat(c);
    Mat Mg = Mat::Zero(dim, dim), Mc = Mat::Zero(dim, dim), Mr = Mat::Zero(dim, dim);
    Mg.topLeftCorner(2, 2) = M.topLeftCorner(2, 2);
    Mc.topRightCorner(2, dim - 2) = M.topRightCorner(2, dim - 2);
    Mc.bottomLeftCorner(dim - 2, 2) = M.bottomLeftCorner(dim - 2, 2);
    Mr.bottomRightCorner(dim - 2, dim - 2) = M.bottomRightCorner(dim - 2, dim - 2);
    Fg.set_mat(c, Mg);
    Fc.set_mat(c, Mc);
    Fr.set_mat(c, Mr);
  }
  rep.gauss = l2_norm(Fg);
  rep.codazzi = l2_norm(Fc) / std::sqrt(2.0);  // each entry counted once
  rep.ricci = l2_norm(Fr);
  return rep;
}

struct FrameField {
  std::vector<Mat> P;  // per vertex
  double holonomy_defect = 0.0;      // max over plaquettes of ||log(loop)||_F
  double transport_mismatch = 0.0;   // max over cross edges
  double orthogonality_defect = 0.0; // max ||P^T P - I||_F
};

// Edge transport exp(-Omega_e) along the lexicographic breadth-first
// spanning tree from vertex 0.
inline FrameField integrate_pfaff(const Grid& g, const Cochain& conn, const Mat& P0) {
  int nv = g.num_cells(0);
  FrameField ff;
  ff.P.assign(nv, Mat());
  std::vector<char> seen(nv, 0);
  std::vector<char> tree_edge(g.num_cells(1), 0);

  auto edge_between = [&](int v, int w, int& sign) -> int {
    int sv, sw;
    std::array<int, 3> pv, pw;
    g.decode(0, v, sv, pv);
    g.decode(0, w, sw, pw);
    for (int axis = 0; axis < 2; ++axis) {
      std::array<int, 3> lo = pv;
      if (pw[axis] == pv[axis] + 1 && pw[1 - axis] == pv[1 - axis]) {
        sign = 1;
        return g.cell_index(1, g.subset_id(1, 1u << axis), lo);
      }
      if (pw[axis] == pv[axis] - 1 && pw[1 - axis] == pv[1 - axis]) {
        sign = -1;
        lo[axis] -= 1;
        return g.cell_index(1, g.subset_id(1, 1u << axis), lo);
      }
    }
    return -1;
  };

  auto neighbors = [&](int v) {
    std::vector<int> out;
    int sv;
    std::array<int, 3> p;
    g.decode(0, v, sv, p);
    for (int axis = 0; axis < 2; ++axis)
      for (int d : {-1, 1}) {
        std::array<int, 3> q = p;
        q[axis] += d;
        if (q[axis] < 0 || q[axis] > g.counts()[axis]) continue;
        out.push_back(g.cell_index(0, 0, q));
      }
    std::sort(out.begin(), out.end());
    return out;
  };

  std::queue<int> bfs;
  bfs.push(0);
  seen[0] = 1;
  ff.P[0] = P0;
  while (!bfs.empty()) {
    int v = bfs.front();
    bfs.pop();
    for (int w : neighbors(v)) {
      if (seen[w]) continue;
      seen[w] = 1;
      int sign = 0;
      int e = edge_between(v, w, sign);
      tree_edge[e] = 1;
      Mat T = expm(-static_cast<double>(sign) * conn.mat(e));
      ff.P[w] = T * ff.P[v];
      bfs.push(w);
    }
  }

  for (int v = 0; v < nv; ++v) {
    double d = (ff.P[v].transpose() * ff.P[v] - Mat::Identity(P0.rows(), P0.cols())).norm();
    ff.orthogonality_defect = std::max(ff.orthogonality_defect, d);
  }

  // transport mismatch on edges outside the tree
  for (int e = 0; e < g.num_cells(1); ++e) {
    if (tree_edge[e]) continue;
    int si;
    std::array<int, 3> pos;
    g.decode(1, e, si, pos);
    int axis = g.subset_mask(1, si) == 1u ? 0 : 1;
    std::array<int, 3> hp = pos;
    hp[axis] += 1;
    int vt = g.cell_index(0, 0, pos), vh = g.cell_index(0, 0, hp);
    double d = (ff.P[vh] - expm(-conn.mat(e)) * ff.P[vt]).norm();
    ff.transport_mismatch = std::max(ff.transport_mismatch, d);
  }

  // plaquette holonomy
  for (int c = 0; c < g.num_cells(2); ++c) {
    int si;
    std::array<int, 3> pos;
    g.decode(2, c, si, pos);
    std::array<int, 3> pr = pos, pt = pos;
    pr[0] += 1;
    pt[1] += 1;
    int eb = g.cell_index(1, g.subset_id(1, 1u), pos);
    int er = g.cell_index(1, g.subset_id(1, 2u), pr);
    int et = g.cell_index(1, g.subset_id(1, 1u), pt);
    int el = g.cell_index(1, g.subset_id(1, 2u), pos);
    Mat hol = expm(conn.mat(el)) * expm(conn.mat(et)) * expm(-conn.mat(er)) * expm(-conn.mat(eb));
    ff.holonomy_defect = std::max(ff.holonomy_defect, logm_near_identity(hol).norm());
  }
  return ff;
}

struct Immersion {
  std::vector<Eigen::VectorXd> positions;  // per vertex, R^{2+codim}
  double isometry_defect = 0.0;  // max_e | |d iota|^2 - g-length^2 | / h^2
};

enum class IntegrationMode { spanning_tree, least_squares };

namespace detail {

inline double isometry_defect(const ImmersionData& data, const std::vector<Eigen::VectorXd>& pos) {
  const Grid& g = *data.grid;
  double h2 = g.spacing() * g.spacing();
  double defect = 0.0;
  for (int e = 0; e < g.num_cells(1); ++e) {
    int si;
    std::array<int, 3> p;
    g.decode(1, e, si, p);
    int axis = g.subset_mask(1, si) == 1u ? 0 : 1;
    std::array<int, 3> hp = p;
    hp[axis] += 1;
    int vt = g.cell_index(0, 0, p), vh = g.cell_index(0, 0, hp);
    double len2 = (pos[vh] - pos[vt]).squaredNorm();
    double glen2 = h2 * 0.5 * (data.metric[vt](axis, axis) + data.metric[vh](axis, axis));
    defect = std::max(defect, std::abs(len2 - glen2) / h2);
  }
  return defect;
}

}  // namespace detail


// d iota = omega^T P integrated along the same spanning tree.
inline Immersion integrate_immersion(const ImmersionData& data, const CartanConnection& cc,
                                     const FrameField& ff) {
  const Grid& g = *data.grid;
  int dim = 2 + cc.codim;
  int nv = g.num_cells(0);
  Immersion im;
  im.positions.assign(nv, Eigen::VectorXd::Zero(dim));

  auto increment = [&](int e, int vt, int vh) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
    Mat Pm = 0.5 * (ff.P[vt] + ff.P[vh]);
    for (int a = 0; a < dim; ++a) d += cc.coframe[a].values(0, e) * Pm.row(a).transpose();
    return d;
  };

  std::vector<char> seen(nv, 0);
  std::queue<int> bfs;
  bfs.push(0);
  seen[0] = 1;
  auto vid = [&](int x, int y) { return x * (g.counts()[1] + 1) + y; };
  (void)vid;
  while (!bfs.empty()) {
    int v = bfs.front();
    bfs.pop();
    int sv;
    std::array<int, 3> p;
    g.decode(0, v, sv, p);
    std::vector<int> nb;
    for (int axis = 0; axis < 2; ++axis)
      for (int d : {-1, 1}) {
        std::array<int, 3> q = p;
        q[axis] += d;
        if (q[axis] < 0 || q[axis] > g.counts()[axis]) continue;
        nb.push_back(g.cell_index(0, 0, q));
      }
    std::sort(nb.begin(), nb.end());
    for (int w : nb) {
      if (seen[w]) continue;
      seen[w] = 1;
      int sw;
      std::array<int, 3> q;
      g.decode(0, w, sw, q);
      int axis = q[0] != p[0] ? 0 : 1;
      bool forward = q[axis] > p[axis];
      std::array<int, 3> lo = forward ? p : q;
      int e = g.cell_index(1, g.subset_id(1, 1u << axis), lo);
      Eigen::VectorXd inc = increment(e, forward ? v : w, forward ? w : v);
      im.positions[w] = im.positions[v] + (forward ? inc : Eigen::VectorXd(-inc));
      bfs.push(w);
    }
  }

  im.isometry_defect = detail::isometry_defect(data, im.positions);
  return im;
}

// Global least-squares alternative for noisy data, off by default: minimize
// sum_e | iota(head) - iota(tail) - (omega^T P)_e |^2 over all vertex
// positions, one Neumann-type solve per ambient coordinate.
inline Immersion integrate_immersion_least_squares(const ImmersionData& data,
                                                   const CartanConnection& cc,
                                                   const FrameField& ff) {
  const Grid& g = *data.grid;
  int dim = 2 + cc.codim;
  int nv = g.num_cells(0);
  LieAlgebra scalar(1, Flavor::u1);
  HodgeLaplacian lap0(g, 0, Bc::absolute, TraceHandling::natural);
  Immersion im;
  im.positions.assign(nv, Eigen::VectorXd::Zero(dim));
  for (int a = 0; a < dim; ++a) {
    Cochain inc = zero_cochain(g, 1, scalar);
    for (int e = 0; e < g.num_cells(1); ++e) {
      int si;
      std::array<int, 3> p;
      g.decode(1, e, si, p);
      int axis = g.subset_mask(1, si) == 1u ? 0 : 1;
      std::array<int, 3> hp = p;
      hp[axis] += 1;
      int vt = g.cell_index(0, 0, p), vh = g.cell_index(0, 0, hp);
      Mat Pm = 0.5 * (ff.P[vt] + ff.P[vh]);
      double v = 0.0;
      for (int b = 0; b < dim; ++b) v += cc.coframe[b].values(0, e) * Pm(b, a);
      inc.values(0, e) = v;
    }
    auto [phi, rep] = lap0.solve(codifferential(inc), 1e-12);
    for (int vtx = 0; vtx < nv; ++vtx) im.positions[vtx](a) = phi.values(0, vtx);
  }
  im.isometry_defect = detail::isometry_defect(data, im.positions);
  return im;
}

// Least-squares rigid alignment (proper rotation + translation) of the
// integrated immersion against a reference; returns the sup vertex error.
inline double aligned_sup_error(const std::vector<Eigen::VectorXd>& pos,
                                const std::vector<Eigen::VectorXd>& ref) {
  if (pos.size() != ref.size() || pos.empty())
    throw std::invalid_argument("alignment needs matching nonempty point sets");
  int dim = static_cast<int>(pos[0].size());
  Eigen::VectorXd cp = Eigen::VectorXd::Zero(dim), cr = Eigen::VectorXd::Zero(dim);
  for (size_t i = 0; i < pos.size(); ++i) {
    cp += pos[i];
    cr += ref[i];
  }
  cp /= static_cast<double>(pos.size());
  cr /= static_cast<double>(pos.size());
  Mat H = Mat::Zero(dim, dim);
  for (size_t i = 0; i < pos.size(); ++i) H += (pos[i] - cp) * (ref[i] - cr).transpose();
  Eigen::JacobiSVD<Mat> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat R = svd.matrixV() * svd.matrixU().transpose();
  if (R.determinant() < 0.0) {
    Mat V = svd.matrixV();
    V.col(dim - 1) *= -1.0;
    R = V * svd.matrixU().transpose();
  }
  double sup = 0.0;
  for (size_t i = 0; i < pos.size(); ++i)
    sup = std::max(sup, (R * (pos[i] - cp) + cr - ref[i]).norm());
  return sup;
}

}  // namespace gaugedec
