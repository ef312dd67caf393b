// Reproducible experiment inputs: rough connections with prescribed
// curvature (white-noise exact part + coexact bump, rescaled to a target
// L^p norm), analytic fundamental-form patches (sphere, cylinder), and the
// oscillation families live in stability.hpp.
#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "gaugedec/cochain.hpp"
#include "gaugedec/immersion.hpp"
#include "gaugedec/random.hpp"

namespace gaugedec {

struct ConnectionFixture {
  std::shared_ptr<Grid> grid;
  LieAlgebra algebra{1, Flavor::u1};
  Cochain omega;  // = d phi0 + d* psi0, rescaled
  Cochain F;      // discrete curvature of omega
  Cochain phi0, psi0;
};

// White-noise scalar potential plus a coexact part with vanishing normal
// trace, rescaled so ||omega||_{L^p} hits the target exactly (the map is
// linear in (phi0, psi0)).  rough_psi switches the coexact amplitude from a
// smooth bump to white noise.
inline ConnectionFixture rough_connection(std::shared_ptr<Grid> grid, const LieAlgebra& alg,
                                          std::uint64_t seed, double target_lp, double p,
                                          bool rough_psi = false) {
  const Grid& g = *grid;
  Rng rng(seed);
  ConnectionFixture fx;
  fx.grid = grid;
  fx.algebra = alg;
  fx.phi0 = zero_cochain(g, 0, alg);
  for (int i = 0; i < fx.phi0.cells(); ++i) fx.phi0.set_mat(i, alg.random_element(rng));
  fx.psi0 = zero_cochain(g, 2, alg);
  double h = g.spacing();
  double Lx = g.counts()[0] * h, Ly = g.counts()[1] * h;
  const double PI = 3.14159265358979323846;
  for (int i = 0; i < fx.psi0.cells(); ++i) {
    auto x = g.center(2, i);
    double amp = rough_psi ? rng.normal() : std::sin(PI * x[0] / Lx) * std::sin(PI * x[1] / Ly);
    fx.psi0.set_mat(i, amp * h * h * alg.random_element(rng));
  }
  if (g.topology() == Topology::box) {
    auto normal = trace_mask(g).normal_flags(g, 2);
    for (int i = 0; i < fx.psi0.cells(); ++i)
      if (normal[i]) fx.psi0.values.col(i).setZero();
  } else {
    fx.psi0 -= harmonic_component(fx.psi0);
  }
  fx.omega = exterior_d(fx.phi0) + codifferential(fx.psi0);
  double c = target_lp / lp_norm(fx.omega, p);
  fx.phi0 *= c;
  fx.psi0 *= c;
  fx.omega *= c;
  fx.F = curvature(fx.omega);
  return fx;
}

struct ImmersionFixture {
  ImmersionData data;
  std::vector<Eigen::VectorXd> reference;  // analytic surface points per vertex
};

// Graph chart of the round sphere of radius R over [-w, w]^2; the shape
// operator is (1/R) Id, so the coordinate second fundamental form is -g/R.
// gauss_scale != 1 scales II, breaking the Gauss equation by
// (gauss_scale^2 - 1)/R^2 while Codazzi stays satisfied.
inline ImmersionFixture sphere_patch(int N, double R, double halfwidth, double gauss_scale = 1.0) {
  if (halfwidth * std::sqrt(2.0) >= R)
    throw std::invalid_argument("sphere chart must stay inside the equator");
  ImmersionFixture fx;
  fx.data.grid = std::make_shared<Grid>(2, std::array<int, 3>{N, N, 1}, 2.0 * halfwidth / N,
                                        Topology::box);
  fx.data.codim = 1;
  const Grid& g = *fx.data.grid;
  int nv = g.num_cells(0);
  fx.data.metric.resize(nv);
  fx.data.second_fundamental.assign(nv, {Mat::Zero(2, 2)});
  fx.data.normal_connection.assign(nv, {Mat::Zero(1, 1), Mat::Zero(1, 1)});
  fx.reference.resize(nv);
  for (int i = 0; i < nv; ++i) {
    auto x = g.center(0, i);
    double u = x[0] - halfwidth, v = x[1] - halfwidth;
    double z = std::sqrt(R * R - u * u - v * v);
    Mat gm(2, 2);
    gm << 1 + u * u / (z * z), u * v / (z * z), u * v / (z * z), 1 + v * v / (z * z);
    fx.data.metric[i] = gm;
    fx.data.second_fundamental[i][0] = -(gauss_scale / R) * gm;
    fx.reference[i] = Eigen::Vector3d(u, v, z);
  }
  return fx;
}

// Arc-length chart of a cylinder of radius R: flat metric, principal
// curvatures (1/R, 0).
inline ImmersionFixture cylinder_patch(int N, double R, double halfwidth) {
  ImmersionFixture fx;
  fx.data.grid = std::make_shared<Grid>(2, std::array<int, 3>{N, N, 1}, 2.0 * halfwidth / N,
                                        Topology::box);
  fx.data.codim = 1;
  const Grid& g = *fx.data.grid;
  int nv = g.num_cells(0);
  fx.data.metric.assign(nv, Mat::Identity(2, 2));
  Mat II = Mat::Zero(2, 2);
  II(0, 0) = -1.0 / R;
  fx.data.second_fundamental.assign(nv, {II});
  fx.data.normal_connection.assign(nv, {Mat::Zero(1, 1), Mat::Zero(1, 1)});
  fx.reference.resize(nv);
  for (int i = 0; i < nv; ++i) {
    auto x = g.center(0, i);
    double u = x[0] - halfwidth, v = x[1] - halfwidth;
    fx.reference[i] = Eigen::Vector3d(R * std::sin(u / R), v, R * std::cos(u / R));
  }
  return fx;
}

}  // namespace gaugedec
