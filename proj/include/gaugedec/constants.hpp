// Certified constants of the smoothing construction: the Poincare constant
// mu_U on the normal-trace-free subspace, the Gaffney constant C4, the
// empirical elliptic/operator constant K1, and the smallness thresholds
// kappa1 / kappa0 derived from them.
//
// K1 has no closed discrete form for p != 2, so it is estimated by random
// probing with a 1.5x safety factor; the smoothing engine treats a
// contraction failure under a passing smallness check as a falsification
// signal for the estimate.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "gaugedec/cochain.hpp"
#include "gaugedec/elliptic.hpp"
#include "gaugedec/norms.hpp"
#include "gaugedec/random.hpp"

namespace gaugedec {

struct Thresholds {
  double kappa1 = 0.0;
  double kappa0 = 0.0;
  double kappa0_precap = 0.0;       // kappa1 / (6 K1), before the Poincare cap
  double kappa0_poincare_cap = 0.0; // 0.99 / (3 K1 (1 + mu))
};

struct ConstantsCertificate {
  double mu = 0.0;       // Poincare constant, length units
  double gaffney = 0.0;  // C4
  double k1 = 0.0;       // elliptic/operator constant estimate
  int probes = 0;
  double kappa1 = 0.0;
  double kappa0 = 0.0;
  double p = 0.0;
  std::string grid_hash;
  std::string flavor;
};

// mu_U = 1 / sqrt(lambda_1) with lambda_1 the smallest nonzero eigenvalue of
// the constrained Hodge Laplacian (full Dirichlet form |d.|^2 + |d*.|^2).
inline double poincare_constant(const Grid& g, int k, Bc bc) {
  HodgeLaplacian lap(g, k, bc, TraceHandling::strong);
  double lam = lap.smallest_nonzero_eigenvalue(1e-12);
  return 1.0 / std::sqrt(lam);
}

// C4 = 1 / sqrt(sigma) with sigma the smallest nonzero generalized
// eigenvalue of the |d* .|^2 form against the quadratic W^{1,2} form on the
// normal-trace-free top-degree subspace (harmonic fields are excluded; on a
// box the constrained form has none).
inline double gaffney_constant(const Grid& g) {
  if (g.topology() != Topology::box)
    throw std::invalid_argument("gaffney_constant expects absolute conditions on a box");
  int k = g.dimension();
  HodgeLaplacian lap(g, k, Bc::absolute, TraceHandling::strong);
  const SpMat& A = lap.stiffness();  // top degree: the d d* form only
  SpMat B = SpMat(diag_sparse(lap.mass()) + A);  // ||xi||^2 + ||d* xi||^2
  Eigen::MatrixXd none(lap.dofs(), 0);
  double sigma = smallest_generalized_eigenvalue(A, B, none, 1e-12);
  return 1.0 / std::sqrt(sigma);
}

// Empirical maximization of ||T(zeta)||_{W^{1,p}} over random unit-norm
// probe triples (F, phi, zeta), including pure-F probes; returns the max
// ratio with a 1.5 safety factor.
inline double elliptic_constant(const Grid& g, double p, int probes, const LieAlgebra& alg,
                                std::uint64_t seed = 2024) {
  if (probes < 32) throw std::invalid_argument("elliptic_constant needs at least 32 probes");
  Bc bc = g.topology() == Topology::torus ? Bc::periodic : Bc::absolute;
  HodgeLaplacian lap2(g, 2, bc, TraceHandling::natural);
  NormContext ctx(g);
  Rng rng(seed);
  auto random_cochain = [&](int k) {
    Cochain c = zero_cochain(g, k, alg);
    for (int i = 0; i < c.cells(); ++i) c.set_mat(i, alg.random_element(rng));
    return c;
  };
  double best = 0.0;
  for (int i = 0; i < probes; ++i) {
    bool pure = (i % 4 == 0);  // every fourth probe tests the bare elliptic bound
    Cochain F = random_cochain(2);
    F -= harmonic_component(F);
    F *= 1.0 / wminus1p_norm(ctx, F, p);
    double denom = 1.0;  // ||F||_{W^{-1,p}} after normalization
    Cochain rhs = F;
    if (!pure) {
      Cochain phi = random_cochain(0);
      phi *= 1.0 / w1p_quad_norm(phi, p);
      Cochain zeta = random_cochain(2);
      zeta *= 1.0 / w1p_quad_norm(zeta, p);
      Cochain omega = exterior_d(phi) + codifferential(zeta);
      rhs -= wedge(omega, omega);
      denom += 2.0;  // + ||phi||^2 + ||zeta||^2, both unit
    }
    auto [t, rep] = lap2.solve(rhs, 1e-10);
    best = std::max(best, w1p_quad_norm(t, p) / denom);
  }
  return 1.5 * best;
}

// kappa1 fixed by K1 kappa1 <= 1/3; kappa0 by 2 K1 kappa0 <= kappa1 / 3,
// capped at 1 and tightened so that mu * k0'/(1 - k0') < 1 holds with
// k0' = 3 K1 kappa0.
inline Thresholds thresholds(double k1, double mu) {
  if (k1 <= 0.0 || mu <= 0.0) throw std::invalid_argument("thresholds need positive K1 and mu");
  Thresholds t;
  t.kappa1 = 1.0 / (3.0 * k1);
  t.kappa0_precap = t.kappa1 / (6.0 * k1);
  t.kappa0_poincare_cap = 0.99 / (3.0 * k1 * (1.0 + mu));
  t.kappa0 = std::min({1.0, t.kappa1, t.kappa0_precap, t.kappa0_poincare_cap});
  return t;
}

inline ConstantsCertificate certify(const Grid& g, double p, const LieAlgebra& alg,
                                    int probes = 32, std::uint64_t seed = 2024) {
  ConstantsCertificate cert;
  cert.p = p;
  cert.probes = probes;
  cert.flavor = to_string(alg.flavor());
  Bc bc = g.topology() == Topology::torus ? Bc::periodic : Bc::absolute;
  cert.mu = poincare_constant(g, g.dimension(), bc);
  cert.gaffney = g.topology() == Topology::box ? gaffney_constant(g) : 0.0;
  cert.k1 = elliptic_constant(g, p, probes, alg, seed);
  Thresholds t = thresholds(cert.k1, cert.mu);
  cert.kappa1 = t.kappa1;
  cert.kappa0 = t.kappa0;
  return cert;
}

}  // namespace gaugedec
