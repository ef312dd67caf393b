#include "doctest.h"

#include "gaugedec/constants.hpp"
#include "gaugedec/hodge_split.hpp"

#include <cmath>

using namespace gaugedec;

namespace {
const double PI = 3.14159265358979323846;
}

TEST_CASE("poincare constant: unit torus k=0 approaches 1/(2 pi)") {
  Grid g(2, {32, 32, 1}, 1.0 / 32, Topology::torus);
  double mu = poincare_constant(g, 0, Bc::periodic);
  // exact discrete eigenvalue oracle
  double h = g.spacing();
  double lam = (2.0 / h) * (2.0 / h) * std::sin(PI * h) * std::sin(PI * h);
  CHECK(mu == doctest::Approx(1.0 / std::sqrt(lam)).epsilon(1e-9));
  CHECK(std::abs(mu - 1.0 / (2 * PI)) < 0.01 * (1.0 / (2 * PI)));
}

TEST_CASE("poincare constant: unit box k=0 neumann approaches 1/pi") {
  Grid g(2, {32, 32, 1}, 1.0 / 32, Topology::box);
  double mu = poincare_constant(g, 0, Bc::absolute);
  // analytic eigenfunction cos(pi x) discretizes to eigenvalue (2/h)^2 sin^2(pi h / 2)
  double h = g.spacing();
  double lam = (2.0 / h) * (2.0 / h) * std::sin(PI * h / 2) * std::sin(PI * h / 2);
  CHECK(mu == doctest::Approx(1.0 / std::sqrt(lam)).epsilon(1e-9));
  CHECK(std::abs(mu - 1.0 / PI) < 0.01 * (1.0 / PI));
}

TEST_CASE("poincare constant doubles under grid scaling by 2") {
  Grid g1(2, {16, 16, 1}, 1.0 / 16, Topology::box);
  Grid g2(2, {16, 16, 1}, 2.0 / 16, Topology::box);
  double m1 = poincare_constant(g1, 0, Bc::absolute);
  double m2 = poincare_constant(g2, 0, Bc::absolute);
  CHECK(m2 == doctest::Approx(2.0 * m1).epsilon(1e-9));
}

TEST_CASE("poincare diameter monotonicity on nested boxes") {
  double h = 1.0 / 32;
  double prev = std::numeric_limits<double>::infinity();
  for (int N : {32, 28, 24, 20, 16}) {
    Grid g(2, {N, N, 1}, h, Topology::box);
    double mu = poincare_constant(g, 0, Bc::absolute);
    CHECK(mu < prev);
    prev = mu;
  }
}

TEST_CASE("poincare constant at top degree with strong trace elimination") {
  // dirichlet-type problem on the interior plaquettes; positive and finite
  Grid g(2, {16, 16, 1}, 1.0 / 16, Topology::box);
  double mu = poincare_constant(g, 2, Bc::absolute);
  CHECK(mu > 0.0);
  CHECK(mu < 1.0);
}

TEST_CASE("gaffney constant: determinism, mesh stability, certificate") {
  Grid g(2, {12, 12, 1}, 1.0 / 12, Topology::box);
  double c4a = gaffney_constant(g);
  Grid g2(2, {12, 12, 1}, 1.0 / 12, Topology::box);
  CHECK(c4a == gaffney_constant(g2));  // depends on (counts, h) only

  Grid gr(2, {24, 24, 1}, 1.0 / 24, Topology::box);
  double c4r = gaffney_constant(gr);
  CHECK(std::abs(c4r - c4a) < 0.05 * c4a);

  // certificate: random admissible fields obey ||xi||_W12 <= 1.01 C4 ||d* xi||
  HodgeLaplacian lap(g, 2, Bc::absolute, TraceHandling::strong);
  TraceMask mask = trace_mask(g);
  auto normal = mask.normal_flags(g, 2);
  LieAlgebra u1(1, Flavor::u1);
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    Cochain xi = zero_cochain(g, 2, u1);
    for (int i = 0; i < xi.cells(); ++i)
      if (!normal[i]) xi.values(0, i) = rng.normal();
    double w12 = w1p_quad_norm(xi, 2.0);
    double dstar = l2_norm(codifferential(xi));
    CHECK(w12 <= 1.01 * c4a * dstar);
  }
  CHECK_THROWS(gaffney_constant(Grid(2, {8, 8, 1}, 0.125, Topology::torus)));
}

TEST_CASE("elliptic constant: abelian probes obey the p=2 spectral bound") {
  Grid g(2, {12, 12, 1}, 1.0 / 12, Topology::torus);
  LieAlgebra u1(1, Flavor::u1);
  NormContext ctx(g);
  HodgeLaplacian lap2(g, 2, Bc::periodic, TraceHandling::natural);
  double lam1 = lap2.smallest_nonzero_eigenvalue(1e-11);
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Cochain f = zero_cochain(g, 2, u1);
    for (int i = 0; i < f.cells(); ++i) f.values(0, i) = rng.normal();
    f -= harmonic_component(f);
    auto [u, rep] = lap2.solve(f, 1e-11);
    double ratio = w1p_quad_norm(u, 2.0) / wminus1p_norm(ctx, f, 2.0);
    CHECK(ratio <= (1.0 + 1.0 / lam1) * (1.0 + 1e-9));
  }
}

TEST_CASE("elliptic constant: probe monotonicity and seed stability") {
  Grid g(2, {8, 8, 1}, 0.125, Topology::box);
  LieAlgebra su2(4, Flavor::su2);
  double k32 = elliptic_constant(g, 4.0, 32, su2, 2024);
  double k64 = elliptic_constant(g, 4.0, 64, su2, 2024);
  CHECK(k64 >= k32);  // max over a superset of the same probe stream

  double k32b = elliptic_constant(g, 4.0, 32, su2, 77);
  CHECK(std::abs(k32b - k32) <= 0.2 * std::max(k32, k32b));

  CHECK_THROWS(elliptic_constant(g, 4.0, 8, su2));
}

TEST_CASE("thresholds: paper-pinned examples and monotonicity") {
  double mu = 0.2;
  Thresholds t1 = thresholds(1.0, mu);
  CHECK(t1.kappa1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(t1.kappa0_precap == doctest::Approx(1.0 / 18.0).epsilon(1e-15));

  Thresholds t10 = thresholds(10.0, mu);
  CHECK(t10.kappa1 == doctest::Approx(1.0 / 30.0).epsilon(1e-15));
  CHECK(t10.kappa0_precap == doctest::Approx(1.0 / 1800.0).epsilon(1e-15));

  CHECK(t10.kappa0 < t1.kappa0);  // K1 up, kappa0 down

  for (double k1 : {0.5, 1.0, 3.0, 12.0}) {
    Thresholds t = thresholds(k1, mu);
    CHECK(t.kappa0 <= t.kappa1);
    CHECK(k1 * t.kappa1 <= 1.0 / 3.0 + 1e-15);
    CHECK(2.0 * k1 * t.kappa0 <= t.kappa1 / 3.0 + 1e-15);
    double k0p = 3.0 * k1 * t.kappa0;
    CHECK(mu * k0p / (1.0 - k0p) < 1.0);
  }
}

TEST_CASE("certificate assembly on the su2 box") {
  Grid g(2, {16, 16, 1}, 1.0 / 16, Topology::box);
  LieAlgebra su2(4, Flavor::su2);
  ConstantsCertificate cert = certify(g, 4.0, su2, 32);
  CHECK(cert.mu > 0.0);
  CHECK(cert.gaffney > 0.0);
  CHECK(cert.k1 > 0.0);
  CHECK(cert.kappa0 > 0.0);
  CHECK(cert.kappa0 <= cert.kappa1);
  CHECK(cert.probes == 32);
  CHECK(cert.flavor == "su2");
}

TEST_CASE("mu certificate on 100 random trace-free top-degree fields") {
  Grid g(2, {12, 12, 1}, 1.0 / 12, Topology::box);
  double mu = poincare_constant(g, 2, Bc::absolute);
  TraceMask mask = trace_mask(g);
  auto normal = mask.normal_flags(g, 2);
  LieAlgebra u1(1, Flavor::u1);
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    Cochain xi = zero_cochain(g, 2, u1);
    for (int i = 0; i < xi.cells(); ++i)
      if (!normal[i]) xi.values(0, i) = rng.normal();
    double grad = l2grad_norm(xi);
    CHECK(l2_norm(xi) <= (1.0 + 1e-8) * mu * grad);
  }
}
