#include "doctest.h"

#include "gaugedec/hodge_split.hpp"

#include <cmath>

using namespace gaugedec;

namespace {

const double PI = 3.14159265358979323846;

// Fixture-style rough connection: Omega = d phi0 + d* psi0 with psi0
// vanishing on normal boundary cells (box) or harmonic-free (torus).
struct Synthetic {
  Cochain omega, phi0, psi0, F;
};

Synthetic synthetic_connection(const Grid& g, const LieAlgebra& alg, Rng& rng, double scale) {
  Synthetic s;
  s.phi0 = zero_cochain(g, 0, alg);
  for (int i = 0; i < s.phi0.cells(); ++i) s.phi0.set_mat(i, alg.random_element(rng, scale));
  s.psi0 = zero_cochain(g, 2, alg);
  double h = g.spacing();
  for (int i = 0; i < s.psi0.cells(); ++i) {
    auto x = g.center(2, i);
    double bump = std::sin(PI * x[0]) * std::sin(PI * x[1]);
    s.psi0.set_mat(i, alg.random_element(rng, scale * bump * h * h));
  }
  if (g.topology() == Topology::box) {
    TraceMask mask = trace_mask(g);
    auto normal = mask.normal_flags(g, 2);
    for (int i = 0; i < s.psi0.cells(); ++i)
      if (normal[i]) s.psi0.values.col(i).setZero();
  } else {
    s.psi0 -= harmonic_component(s.psi0);
  }
  s.omega = exterior_d(s.phi0) + codifferential(s.psi0);
  s.F = curvature(s.omega);
  return s;
}

}  // namespace

TEST_CASE("decompose of the zero connection") {
  Grid g(2, {8, 8, 1}, 0.125, Topology::box);
  LieAlgebra su2(4, Flavor::su2);
  Cochain z1 = zero_cochain(g, 1, su2), z2 = zero_cochain(g, 2, su2);
  HodgeSplit s = decompose(z1, z2, 1e-10, 4.0);
  CHECK(s.phi.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.psi.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.reconstruction_residual == 0.0);
}

TEST_CASE("abelian exact connection: psi = 0 and d phi = omega") {
  Grid g(2, {16, 16, 1}, 1.0 / 16, Topology::box);
  LieAlgebra u1(1, Flavor::u1);
  Rng rng(3);
  Cochain phi0 = zero_cochain(g, 0, u1);
  for (int i = 0; i < phi0.cells(); ++i) phi0.values(0, i) = rng.normal();
  Cochain omega = exterior_d(phi0);
  Cochain F = zero_cochain(g, 2, u1);  // abelian, omega exact
  HodgeSplit s = decompose(omega, F, 1e-11, 4.0);
  CHECK(s.psi.values.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(l2_norm(exterior_d(s.phi) - omega) < 1e-9);
  CHECK(s.reconstruction_residual < 1e-9);
  // phi is mean-zero in the weighted pairing
  CHECK(l2_norm(harmonic_component(s.phi)) < 1e-9);
}

TEST_CASE("potential reconstruction of the zero cochain") {
  Grid g(2, {8, 8, 1}, 0.125, Topology::box);
  LieAlgebra u1(1, Flavor::u1);
  Cochain phi = reconstruct_potential(zero_cochain(g, 1, u1));
  CHECK(phi.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("potential reconstruction recovers a sampled field up to a constant") {
  Grid g(2, {32, 32, 1}, 1.0 / 32, Topology::torus);
  LieAlgebra gl2(2, Flavor::gl);
  Mat A(2, 2);
  A << 1, 0.5, -0.25, 2;
  Cochain phi0 = zero_cochain(g, 0, gl2);
  for (int i = 0; i < phi0.cells(); ++i) {
    auto x = g.center(0, i);
    phi0.set_mat(i, std::sin(2 * PI * x[0]) * A);
  }
  Cochain alpha = exterior_d(phi0);
  Cochain phi = reconstruct_potential(alpha, 1e-12);
  CHECK(l2_norm(exterior_d(phi) - alpha) < 1e-10);
  // sampled sin has zero mean, so the constant offset is zero here
  double sup = 0.0;
  for (int i = 0; i < phi.cells(); ++i)
    sup = std::max(sup, (phi.mat(i) - phi0.mat(i)).cwiseAbs().maxCoeff());
  CHECK(sup <= 1e-9);
}

TEST_CASE("harmonic 1-form on the torus is rejected unless stripped") {
  Grid g(2, {8, 8, 1}, 0.125, Topology::torus);
  LieAlgebra u1(1, Flavor::u1);
  Cochain alpha = zero_cochain(g, 1, u1);
  for (int e = 0; e < alpha.cells(); ++e) {
    int si;
    std::array<int, 3> pos;
    g.decode(1, e, si, pos);
    if (g.subset_mask(1, si) == 1u) alpha.values(0, e) = g.spacing();  // constant A dx1
  }
  CHECK(l2_norm(exterior_d(alpha)) < 1e-14);  // closed...
  CHECK_THROWS(reconstruct_potential(alpha));  // ...but not exact
  Cochain stripped = alpha - harmonic_component(alpha);
  Cochain phi = reconstruct_potential(stripped);  // fine after stripping
  CHECK(l2_norm(exterior_d(phi) - stripped) < 1e-10);
}

TEST_CASE("gauge-equation hypothesis is checked") {
  Grid g(2, {8, 8, 1}, 0.125, Topology::box);
  LieAlgebra su2(4, Flavor::su2);
  Rng rng(5);
  Synthetic s = synthetic_connection(g, su2, rng, 0.1);
  Cochain bad = s.F;
  bad.values.array() += 0.05;
  CHECK_THROWS_WITH_AS(decompose(s.omega, bad, 1e-10, 4.0), doctest::Contains("residual"),
                       std::invalid_argument);
}

TEST_CASE("round trip on synthetic connections (box n=2, su2)") {
  Grid g(2, {16, 16, 1}, 1.0 / 16, Topology::box);
  LieAlgebra su2(4, Flavor::su2);
  Rng rng(7);
  Synthetic s = synthetic_connection(g, su2, rng, 0.5);
  HodgeSplit sp = decompose(s.omega, s.F, 1e-10, 4.0);
  CHECK(sp.reconstruction_residual <= 1e-9);
  CHECK(sp.dpsi_l2 == 0.0);                 // top degree in n=2
  CHECK(sp.normal_trace_defect <= 1e-11);   // psi0 was built trace-free
  CHECK(sp.eta.values.cwiseAbs().maxCoeff() == 0.0);
  // recovery up to gauge: psi exactly, phi up to the additive constant
  Cochain phi0c = s.phi0 - harmonic_component(s.phi0);
  CHECK(w1p_quad_norm(sp.phi - phi0c, 2.0) <= 1e-8);
  CHECK(w1p_quad_norm(sp.psi - s.psi0, 2.0) <= 1e-8);
}

TEST_CASE("round trip on the 3-torus keeps psi closed at solver tolerance") {
  Grid g(3, {8, 8, 8}, 0.125, Topology::torus);
  LieAlgebra so3(3, Flavor::so);
  Rng rng(9);
  Synthetic s = synthetic_connection(g, so3, rng, 0.3);
  HodgeSplit sp = decompose(s.omega, s.F, 1e-10, 4.0);
  CHECK(sp.reconstruction_residual <= 1e-8);
  CHECK(sp.dpsi_l2 <= 10.0 * 1e-10 * std::max(1.0, sp.psi_w12));
}

TEST_CASE("decompose strips the harmonic part on the torus") {
  Grid g(2, {12, 12, 1}, 1.0 / 12, Topology::torus);
  LieAlgebra u1(1, Flavor::u1);
  Rng rng(11);
  Synthetic s = synthetic_connection(g, u1, rng, 0.4);
  // add a constant (harmonic, flat) 1-form; curvature is unchanged
  Cochain harm = zero_cochain(g, 1, u1);
  for (int e = 0; e < harm.cells(); ++e) {
    int si;
    std::array<int, 3> pos;
    g.decode(1, e, si, pos);
    if (g.subset_mask(1, si) == 1u) harm.values(0, e) = 0.3 * g.spacing();
  }
  Cochain omega = s.omega + harm;
  CHECK(l2_norm(curvature(omega) - s.F) < 1e-12);  // abelian: d(const) = 0
  HodgeSplit sp = decompose(omega, s.F, 1e-10, 4.0);
  CHECK(l2_norm(sp.eta - harm) < 1e-9);
  CHECK(sp.reconstruction_residual <= 1e-9);
}
