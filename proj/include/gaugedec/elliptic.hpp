// Hodge Laplacian dd* + d*d on k-cochains with the absolute / periodic
// boundary conditions, its solution operator, and the eigen-solves behind
// the certified constants.
//
// With the trapezoidal boundary weights W the operator Delta = W^{-1} K is
// self-adjoint in the weighted pairing, where
//   K = h^{-2} ( D_k^T W_{k+1} D_k  +  W_k D_{k-1} W_{k-1}^{-1} D_{k-1}^T W_k )
// is symmetric; solves and eigenproblems work on the pencil (K, W).  On a
// torus W is the identity.
//
// Absolute conditions on a box come in two discrete realizations:
//   strong  - normal-trace degrees of freedom eliminated per TraceMask;
//             the constrained subspace behind Poincare / Gaffney constants.
//   natural - the full primal complex; traces hold weakly through the
//             ghost-zero structure of the adjoint.  The Delta-solves inside
//             the decomposition and the smoothing iteration use this form,
//             which keeps the discrete identity chain behind curvature
//             preservation exact (see hodge_split.hpp).
#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "gaugedec/cochain.hpp"
#include "gaugedec/grid.hpp"
#include "gaugedec/random.hpp"

namespace gaugedec {

enum class Bc { absolute, periodic };
enum class TraceHandling { strong, natural };

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;        // ||Delta u - f_perp|| / ||f_perp||
  bool harmonic_removed = false;
};

class SolveFailure : public std::runtime_error {
public:
  SolveFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};


inline SpMat diag_sparse(const Eigen::VectorXd& d) {
  SpMat W(d.size(), d.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(d.size());
  for (int i = 0; i < d.size(); ++i) trips.emplace_back(i, i, d(i));
  W.setFromTriplets(trips.begin(), trips.end());
  return W;
}

class HodgeLaplacian {
public:
  static constexpr int kDirectLimit = 20000;

  HodgeLaplacian(const Grid& g, int k, Bc bc, TraceHandling trace = TraceHandling::strong)
      : grid_(&g), degree_(k), bc_(bc), trace_(trace) {
    if (k < 0 || k > g.dimension()) throw std::invalid_argument("laplacian degree out of range");
    if (bc == Bc::periodic && g.topology() != Topology::torus)
      throw std::invalid_argument("periodic conditions require a torus grid");
    if (bc == Bc::absolute && g.topology() != Topology::box)
      throw std::invalid_argument("absolute conditions require a box grid");

    int nc = g.num_cells(k);
    if (bc == Bc::absolute && trace == TraceHandling::strong) {
      TraceMask mask = trace_mask(g);
      keep_ = free_cells(g, k, mask);
    } else {
      keep_.resize(nc);
      for (int i = 0; i < nc; ++i) keep_[i] = i;
    }

    SpMat S = selection(nc);
    double hinv2 = 1.0 / (g.spacing() * g.spacing());
    SpMat K(dofs(), dofs());
    if (k < g.dimension()) {
      SpMat Dk = g.coboundary(k) * S.transpose();
      K = SpMat(Dk.transpose() * weight_diag_pow(k + 1, 1.0) * Dk);
    }
    if (k > 0) {
      // W_k D_{k-1} W_{k-1}^{-1} D_{k-1}^T W_k = C^T C with
      // C = W_{k-1}^{-1/2} D_{k-1}^T W_k
      SpMat C = weight_diag_pow(k - 1, -0.5) * SpMat(g.coboundary(k - 1).transpose()) *
                weight_diag_pow(k, 1.0) * S.transpose();
      K = K + SpMat(C.transpose() * C);
    }
    K_ = hinv2 * K;
    K_.makeCompressed();
    w_ = Eigen::VectorXd(dofs());
    for (int i = 0; i < dofs(); ++i) w_(i) = g.cell_weight(k, keep_[i]);
    build_harmonics();
  }

  const Grid& grid() const { return *grid_; }
  int degree() const { return degree_; }
  Bc bc() const { return bc_; }
  TraceHandling trace_handling() const { return trace_; }
  int dofs() const { return static_cast<int>(keep_.size()); }
  const SpMat& stiffness() const { return K_; }
  const Eigen::VectorXd& mass() const { return w_; }
  int kernel_dim() const { return static_cast<int>(harmonic_.cols()); }
  const Eigen::MatrixXd& harmonic_basis() const { return harmonic_; }
  const std::vector<int>& kept_cells() const { return keep_; }

  // Minimum-norm solution of Delta u = f_perp; f's harmonic component is
  // projected out (in the weighted pairing) and recorded.
  std::pair<Cochain, SolveReport> solve(const Cochain& f, double tol = 1e-10) const {
    check_input(f);
    Eigen::MatrixXd B = gather(f);  // dofs x m^2, plain f values
    SolveReport rep;
    double removed = project_out_harmonics(B);
    rep.harmonic_removed = removed > 1e-14 * (1.0 + B.norm());
    double bnorm = B.norm();
    Eigen::MatrixXd X;
    if (bnorm == 0.0) {
      X = Eigen::MatrixXd::Zero(B.rows(), B.cols());
    } else if (dofs() <= kDirectLimit && !force_iterative_) {
      X = direct_solve(B, tol, rep);
    } else {
      X = cg_solve(B, tol, rep);
    }
    project_out_harmonics(X);
    rep.residual = bnorm == 0.0 ? 0.0 : (apply_kept(X) - B).norm() / bnorm;
    if (rep.residual > 10.0 * tol)
      throw SolveFailure("hodge laplacian solve did not reach tolerance", rep.residual);
    return {scatter(f, X), rep};
  }

  // (Delta + shift) u = f, shift > 0; nonsingular, no deflation involved.
  Cochain solve_shifted(const Cochain& f, double shift) const {
    check_input(f);
    if (shift <= 0.0) throw std::invalid_argument("shift must be positive");
    Eigen::MatrixXd B = w_.asDiagonal() * gather(f);
    if (!shifted_ || shifted_shift_ != shift) {
      SpMat M = K_ + shift * diag_sparse(w_);
      shifted_ = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(M);
      if (shifted_->info() != Eigen::Success)
        throw SolveFailure("shifted factorization failed", 1.0);
      shifted_shift_ = shift;
    }
    Eigen::MatrixXd X = shifted_->solve(B);
    return scatter(f, X);
  }

  // Apply Delta = W^{-1} K to a full cochain.
  Cochain apply(const Cochain& u) const {
    check_input(u);
    Eigen::MatrixXd U = gather(u);
    return scatter(u, apply_kept(U));
  }

  // Smallest nonzero eigenvalue of the pencil (K, W) by deflated block
  // inverse iteration with Rayleigh-Ritz extraction.
  double smallest_nonzero_eigenvalue(double tol = 1e-10, int max_sweeps = 500) const;

  void set_force_iterative(bool v) { force_iterative_ = v; }

private:
  SpMat selection(int nc) const {
    SpMat S(dofs(), nc);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(keep_.size());
    for (size_t i = 0; i < keep_.size(); ++i) trips.emplace_back(static_cast<int>(i), keep_[i], 1.0);
    S.setFromTriplets(trips.begin(), trips.end());
    return S;
  }

  SpMat weight_diag_pow(int k, double e) const {
    int nc = grid_->num_cells(k);
    Eigen::VectorXd d(nc);
    for (int i = 0; i < nc; ++i) d(i) = std::pow(grid_->cell_weight(k, i), e);
    return diag_sparse(d);
  }

  void check_input(const Cochain& f) const {
    if (f.grid != grid_ || f.degree != degree_)
      throw std::invalid_argument("cochain does not match the assembled operator");
  }

  Eigen::MatrixXd gather(const Cochain& f) const {
    Eigen::MatrixXd B(dofs(), f.values.rows());
    for (int i = 0; i < dofs(); ++i) B.row(i) = f.values.col(keep_[i]).transpose();
    return B;
  }

  Cochain scatter(const Cochain& like, const Eigen::MatrixXd& X) const {
    Cochain u = zero_cochain(*grid_, degree_, like.algebra);
    for (int i = 0; i < dofs(); ++i) u.values.col(keep_[i]) = X.row(i).transpose();
    return u;
  }

  Eigen::MatrixXd apply_kept(const Eigen::MatrixXd& U) const {
    return w_.cwiseInverse().asDiagonal() * (K_ * U);
  }

  // Exact kernel: per-direction-class constants on the torus, the constant
  // 0-cochain on a box; empty otherwise.  W-orthonormal columns.
  void build_harmonics() {
    std::vector<Eigen::VectorXd> qs;
    if (bc_ == Bc::periodic) {
      const Grid& g = *grid_;
      for (int si = 0; si < g.num_subsets(degree_); ++si) {
        Eigen::VectorXd q = Eigen::VectorXd::Zero(dofs());
        for (int i = 0; i < dofs(); ++i) {
          int csi;
          std::array<int, 3> pos;
          g.decode(degree_, keep_[i], csi, pos);
          if (csi == si) q(i) = 1.0;
        }
        qs.push_back(q);
      }
    } else if (degree_ == 0) {
      qs.push_back(Eigen::VectorXd::Constant(dofs(), 1.0));
    }
    harmonic_.resize(dofs(), static_cast<int>(qs.size()));
    for (size_t j = 0; j < qs.size(); ++j) {
      Eigen::VectorXd q = qs[j];
      q /= std::sqrt(q.dot(w_.asDiagonal() * q));
      harmonic_.col(static_cast<int>(j)) = q;
    }
  }

  // W-orthogonal projection; returns the norm of the removed coefficients.
  double project_out_harmonics(Eigen::MatrixXd& B) const {
    if (harmonic_.cols() == 0) return 0.0;
    Eigen::MatrixXd coef = harmonic_.transpose() * (w_.asDiagonal() * B);
    B.noalias() -= harmonic_ * coef;
    return coef.norm();
  }

  void ensure_shift_factorization() const {
    if (inv_shift_) return;
    double scale = 1.0;
    for (int i = 0; i < K_.outerSize(); ++i)
      for (SpMat::InnerIterator it(K_, i); it; ++it)
        if (it.row() == it.col()) scale = std::max(scale, it.value());
    double delta = scale * 1e-10;
    SpMat M = K_ + delta * diag_sparse(w_);
    inv_shift_ = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(M);
    if (inv_shift_->info() != Eigen::Success)
      throw SolveFailure("laplacian factorization failed", 1.0);
  }

  Eigen::MatrixXd direct_solve(const Eigen::MatrixXd& B, double tol, SolveReport& rep) const {
    ensure_shift_factorization();
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(B.rows(), B.cols());
    Eigen::MatrixXd R = B;  // f-space residual
    double bnorm = B.norm();
    for (int sweep = 0; sweep < 60; ++sweep) {
      Eigen::MatrixXd dX = inv_shift_->solve(w_.asDiagonal() * R);
      project_out_harmonics(dX);
      X += dX;
      R = B - apply_kept(X);
      rep.iterations = sweep + 1;
      if (R.norm() <= 0.1 * tol * bnorm) break;
    }
    return X;
  }

  Eigen::MatrixXd cg_solve(const Eigen::MatrixXd& B, double tol, SolveReport& rep) const {
    Eigen::VectorXd dinv(dofs());
    Eigen::VectorXd diag = K_.diagonal();
    for (int i = 0; i < dofs(); ++i) dinv(i) = diag(i) > 0 ? 1.0 / diag(i) : 1.0;
    Eigen::MatrixXd X(B.rows(), B.cols());
    int total_it = 0;
    int maxit = 200 * static_cast<int>(std::sqrt(static_cast<double>(dofs()))) + 2000;
    for (int c = 0; c < B.cols(); ++c) {
      Eigen::VectorXd b = w_.asDiagonal() * B.col(c);  // K x = W f
      double bn = b.norm();
      Eigen::VectorXd x = Eigen::VectorXd::Zero(dofs());
      if (bn == 0.0) {
        X.col(c) = x;
        continue;
      }
      Eigen::VectorXd r = b, z = dinv.asDiagonal() * r, p = z;
      double rz = r.dot(z);
      int it = 0;
      for (; it < maxit; ++it) {
        if (r.norm() <= tol * bn) break;
        Eigen::VectorXd Kp = K_ * p;
        double alpha = rz / p.dot(Kp);
        x += alpha * p;
        r -= alpha * Kp;
        z = dinv.asDiagonal() * r;
        double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
      }
      if (r.norm() > tol * bn * 10.0)
        throw SolveFailure("conjugate gradients did not converge", r.norm() / bn);
      total_it += it;
      X.col(c) = x;
    }
    rep.iterations = total_it;
    return X;
  }

  const Grid* grid_;
  int degree_;
  Bc bc_;
  TraceHandling trace_;
  std::vector<int> keep_;
  SpMat K_;
  Eigen::VectorXd w_;
  Eigen::MatrixXd harmonic_;
  bool force_iterative_ = false;
  mutable std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> inv_shift_;
  mutable std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> shifted_;
  mutable double shifted_shift_ = -1.0;
};

inline HodgeLaplacian assemble(const Grid& g, int k, Bc bc,
                               TraceHandling trace = TraceHandling::strong) {
  return HodgeLaplacian(g, k, bc, trace);
}

// Smallest nonzero generalized eigenvalue of the symmetric pencil (A, B)
// with B positive definite, deflating the given exact null vectors of A.
// Deflated block inverse iteration in the B-inner product.
inline double smallest_generalized_eigenvalue(const SpMat& A, const SpMat& B,
                                              const Eigen::MatrixXd& null_A,
                                              double tol = 1e-10, int max_sweeps = 500) {
  int n = static_cast<int>(A.rows());
  int b = std::min(4, n - static_cast<int>(null_A.cols()));
  if (b <= 0) throw std::invalid_argument("pencil has no nonzero modes");
  double scale = 1.0;
  for (int i = 0; i < A.outerSize(); ++i)
    for (SpMat::InnerIterator it(A, i); it; ++it)
      if (it.row() == it.col()) scale = std::max(scale, it.value());
  SpMat M = A + (1e-8 * scale) * B;
  Eigen::SimplicialLDLT<SpMat> fact(M);
  if (fact.info() != Eigen::Success) throw SolveFailure("pencil factorization failed", 1.0);

  auto b_project = [&](Eigen::MatrixXd& V) {
    if (null_A.cols() == 0) return;
    Eigen::MatrixXd BN = B * null_A;
    Eigen::MatrixXd G = null_A.transpose() * BN;
    Eigen::MatrixXd coef = G.ldlt().solve(BN.transpose() * V);
    V.noalias() -= null_A * coef;
  };

  Rng rng(54321);
  Eigen::MatrixXd V(n, b);
  for (int j = 0; j < b; ++j)
    for (int i = 0; i < n; ++i) V(i, j) = rng.normal();
  b_project(V);
  double prev = -1.0;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    Eigen::MatrixXd VA = V.transpose() * (A * V);
    Eigen::MatrixXd VB = V.transpose() * (B * V);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (VA + VA.transpose()), 0.5 * (VB + VB.transpose()));
    double lam = es.eigenvalues()(0);
    V = V * es.eigenvectors();
    if (prev >= 0.0 && std::abs(lam - prev) <= tol * std::max(lam, 1e-300)) return lam;
    prev = lam;
    V = fact.solve(B * V);
    b_project(V);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
    V = qr.householderQ() * Eigen::MatrixXd::Identity(n, b);
    b_project(V);
  }
  return prev;
}

inline double HodgeLaplacian::smallest_nonzero_eigenvalue(double tol, int max_sweeps) const {
  return smallest_generalized_eigenvalue(K_, diag_sparse(w_), harmonic_, tol, max_sweeps);
}

}  // namespace gaugedec
