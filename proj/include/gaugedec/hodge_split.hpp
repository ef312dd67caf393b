// Hodge decomposition of a rough connection with prescribed curvature:
// given Omega and F with F(Omega) = F, produce a scalar potential phi and a
// coclosed 2-form potential psi with Omega = d phi + d* psi (+ harmonic part
// on the torus).  psi solves Delta psi = F - Omega ^ Omega; by construction
// the right-hand side is exact, so d psi vanishes at solver tolerance and
// phi recovers the remainder.
#pragma once

#include <cmath>
#include <stdexcept>

#include "gaugedec/cochain.hpp"
#include "gaugedec/elliptic.hpp"
#include "gaugedec/norms.hpp"

namespace gaugedec {

struct HodgeSplit {
  Cochain phi;  // degree 0, zero mean
  Cochain psi;  // degree 2
  Cochain eta;  // degree 1 harmonic part; zero on a box
  double reconstruction_residual = 0.0;  // ||d phi + d* psi + eta - Omega||_Lp
  double dpsi_l2 = 0.0;
  double psi_w12 = 0.0;
  double normal_trace_defect = 0.0;  // max |psi| over normal boundary cells
  SolveReport psi_report, phi_report;
};

// Minimum-L2-norm potential of a closed 1-cochain: phi solves the normal
// equations d*d phi = d* alpha, normalized to zero mean.
inline Cochain reconstruct_potential(const Cochain& alpha, double tol = 1e-10,
                                     SolveReport* report = nullptr) {
  const Grid& g = *alpha.grid;
  if (alpha.degree != 1) throw std::invalid_argument("reconstruct_potential expects a 1-cochain");
  double scale = 1.0 + l2_norm(alpha);
  if (alpha.degree < g.dimension()) {
    double closed = l2_norm(exterior_d(alpha));
    if (closed > 1e-6 * scale)
      throw std::invalid_argument("reconstruct_potential: input is not closed, ||d alpha|| = " +
                                  std::to_string(closed));
  }
  double harm = l2_norm(harmonic_component(alpha));
  if (harm > 1e-6 * scale)
    throw std::invalid_argument(
        "reconstruct_potential: input carries a harmonic component, norm = " +
        std::to_string(harm));

  Bc bc = g.topology() == Topology::torus ? Bc::periodic : Bc::absolute;
  HodgeLaplacian lap0(g, 0, bc, TraceHandling::natural);
  auto [phi, rep] = lap0.solve(codifferential(alpha), tol);
  if (report) *report = rep;
  return phi;  // deflation of the constants already makes phi mean-zero
}

inline HodgeSplit decompose(const Cochain& omega, const Cochain& F, double tol = 1e-10,
                            double p = 4.0, double gauge_tol = 1e-8) {
  const Grid& g = *omega.grid;
  if (omega.degree != 1 || F.degree != 2)
    throw std::invalid_argument("decompose expects a connection 1-cochain and a curvature 2-cochain");

  // gauge-equation hypothesis, checked with the same discrete curvature
  // operator used everywhere
  double gauge_res = lp_norm(curvature(omega) - F, std::max(1.0, p / 2));
  double gauge_scale = 1.0 + lp_norm(F, std::max(1.0, p / 2)) + std::pow(lp_norm(omega, p), 2);
  if (gauge_res > gauge_tol * gauge_scale)
    throw std::invalid_argument("decompose: curvature(Omega) != F, residual = " +
                                std::to_string(gauge_res));

  HodgeSplit split;
  Bc bc = g.topology() == Topology::torus ? Bc::periodic : Bc::absolute;
  HodgeLaplacian lap2(g, 2, bc, TraceHandling::natural);

  Cochain rhs = F - wedge(omega, omega);
  auto [psi, psi_rep] = lap2.solve(rhs, tol);
  split.psi = psi;
  split.psi_report = psi_rep;

  split.eta = harmonic_component(omega);
  Cochain alpha = omega - codifferential(split.psi) - split.eta;
  split.phi = reconstruct_potential(alpha, tol, &split.phi_report);

  Cochain recon = exterior_d(split.phi) + codifferential(split.psi) + split.eta;
  split.reconstruction_residual = lp_norm(recon - omega, p);
  split.dpsi_l2 = split.psi.degree < g.dimension() ? l2_norm(exterior_d(split.psi)) : 0.0;
  split.psi_w12 = w1p_quad_norm(split.psi, 2.0);

  if (g.topology() == Topology::box) {
    TraceMask mask = trace_mask(g);
    for (auto& [idx, cl] : mask.cells[2])
      if (cl == TraceClass::normal)
        split.normal_trace_defect =
            std::max(split.normal_trace_defect, split.psi.values.col(idx).norm());
  }
  return split;
}

}  // namespace gaugedec
