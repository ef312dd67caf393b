// Weak stability of the gauge equation, numerically: families of
// connections converging weakly, wedge-pairing limits against a fixed
// dictionary of band-limited test forms, and the W^{-1,2} compactness proxy
// that separates the failing oscillation family from the gauge-constrained
// one.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gaugedec/cochain.hpp"
#include "gaugedec/norms.hpp"

namespace gaugedec {

struct SequenceSpec {
  enum class Kind { oscillation, gauge_constrained };
  Kind kind = Kind::oscillation;
  std::vector<int> frequencies;  // j indices
  Mat A, B;                      // oscillation coefficient matrices
  double r = 4.0;                // L^r exponent, > 2

  void validate(const Grid& g) const {
    if (r <= 2.0) throw std::invalid_argument("weak stability requires r > 2");
    if (g.topology() != Topology::torus)
      throw std::invalid_argument("oscillating families live on a torus");
    for (int j : frequencies)
      if (j < 1 || 8 * j > g.counts()[0])
        throw std::invalid_argument("frequency " + std::to_string(j) +
                                    " is not resolvable (need j <= N/8)");
  }
};

// Omega_j = sin(2 pi j x1) (A dx1 + B dx2), midpoint-sampled so the
// discrete L^r norms hit the closed-form values exactly for even r.
inline std::vector<Cochain> oscillating_family(const Grid& g, const LieAlgebra& alg,
                                               const SequenceSpec& spec) {
  spec.validate(g);
  const double PI = 3.14159265358979323846;
  std::vector<Cochain> family;
  for (int j : spec.frequencies) {
    Cochain w = zero_cochain(g, 1, alg);
    double h = g.spacing();
    for (int e = 0; e < w.cells(); ++e) {
      int si;
      std::array<int, 3> pos;
      g.decode(1, e, si, pos);
      auto c = g.center(1, e);
      if (g.subset_mask(1, si) == 1u)
        w.set_mat(e, std::sin(2 * PI * j * c[0]) * spec.A * h);
      else if (g.subset_mask(1, si) == 2u)
        w.set_mat(e, std::sin(2 * PI * j * c[0]) * spec.B * h);
    }
    family.push_back(w);
  }
  return family;
}

struct TestForm {
  std::string id;
  std::function<double(const std::array<double, 3>&)> profile;
  Mat direction;  // matrix the trace is taken against
};

// The fixed dictionary: constant, first Fourier modes, two second modes,
// one bump; 12 forms total, all paired against the given matrix direction.
inline std::vector<TestForm> standard_test_forms(const Grid& g, const Mat& M) {
  const double PI = 3.14159265358979323846;
  double Lx = g.counts()[0] * g.spacing(), Ly = g.counts()[1] * g.spacing();
  std::vector<TestForm> forms;
  forms.push_back({"const", [](const std::array<double, 3>&) { return 1.0; }, M});
  auto add = [&](const std::string& id, std::function<double(const std::array<double, 3>&)> f) {
    forms.push_back({id, std::move(f), M});
  };
  add("cos_x1", [=](const std::array<double, 3>& x) { return std::cos(2 * PI * x[0] / Lx); });
  add("sin_x1", [=](const std::array<double, 3>& x) { return std::sin(2 * PI * x[0] / Lx); });
  add("cos_x2", [=](const std::array<double, 3>& x) { return std::cos(2 * PI * x[1] / Ly); });
  add("sin_x2", [=](const std::array<double, 3>& x) { return std::sin(2 * PI * x[1] / Ly); });
  add("cos_sum", [=](const std::array<double, 3>& x) {
    return std::cos(2 * PI * (x[0] / Lx + x[1] / Ly));
  });
  add("sin_sum", [=](const std::array<double, 3>& x) {
    return std::sin(2 * PI * (x[0] / Lx + x[1] / Ly));
  });
  add("cos_diff", [=](const std::array<double, 3>& x) {
    return std::cos(2 * PI * (x[0] / Lx - x[1] / Ly));
  });
  add("sin_diff", [=](const std::array<double, 3>& x) {
    return std::sin(2 * PI * (x[0] / Lx - x[1] / Ly));
  });
  add("cos_2x1", [=](const std::array<double, 3>& x) { return std::cos(4 * PI * x[0] / Lx); });
  add("sin_2x1", [=](const std::array<double, 3>& x) { return std::sin(4 * PI * x[0] / Lx); });
  add("bump", [=](const std::array<double, 3>& x) {
    double u = (x[0] - 0.5 * Lx) / Lx, v = (x[1] - 0.5 * Ly) / Ly;
    return std::exp(-(u * u + v * v) / 0.045);
  });
  return forms;
}

// <W, theta> = sum_topcells tr(W(c)^T M) f(center) h^{2(n - k?)}; for the
// top-degree W produced by wedge this is the L2 pairing against star(theta)
// and approximates the distributional integral of tr(w^T theta).
inline double wedge_pairing(const Cochain& W, const TestForm& form) {
  const Grid& g = *W.grid;
  int n = g.dimension();
  if (W.degree != n) throw std::invalid_argument("wedge_pairing expects a top-degree cochain");
  double scale = std::pow(g.spacing(), n - 2 * W.degree) * std::pow(g.spacing(), n);
  double s = 0.0;
  for (int c = 0; c < W.cells(); ++c) {
    double tr = (W.mat(c).transpose() * form.direction).trace();
    s += g.cell_weight(W.degree, c) * tr * form.profile(g.center(W.degree, c));
  }
  return scale * s;
}

// Neville extrapolation to x = 0.
inline double extrapolate_to_zero(const std::vector<double>& xs, std::vector<double> ys) {
  int n = static_cast<int>(xs.size());
  for (int level = 1; level < n; ++level)
    for (int i = 0; i < n - level; ++i)
      ys[i] = (xs[i + level] * ys[i] - xs[i] * ys[i + 1]) / (xs[i + level] - xs[i]);
  return ys[0];
}

struct WeakLimitReport {
  std::vector<std::string> form_ids;
  std::vector<double> abscissas;      // extrapolation variable per member
  Eigen::MatrixXd pairings;           // member x form
  std::vector<double> extrapolated;   // per form
  std::vector<double> predicted;      // pairing of wedge(limit, limit)
  std::vector<double> defect;         // |extrapolated - predicted|
  double max_defect = 0.0;
};

// Pairings <Omega_j ^ Omega_j, theta> across the family, Richardson
// extrapolation in the given abscissas, comparison against the pairing of
// wedge(limit, limit).
inline WeakLimitReport weak_wedge_limit(const std::vector<Cochain>& family,
                                        const std::vector<double>& abscissas,
                                        const std::vector<TestForm>& forms,
                                        const Cochain& limit) {
  if (family.size() < 4) throw std::invalid_argument("need at least 4 family members");
  if (family.size() != abscissas.size())
    throw std::invalid_argument("one extrapolation abscissa per family member");
  WeakLimitReport rep;
  rep.abscissas = abscissas;
  rep.pairings.resize(static_cast<int>(family.size()), static_cast<int>(forms.size()));
  for (const TestForm& f : forms) rep.form_ids.push_back(f.id);
  for (size_t m = 0; m < family.size(); ++m) {
    Cochain W = wedge(family[m], family[m]);
    for (size_t q = 0; q < forms.size(); ++q)
      rep.pairings(static_cast<int>(m), static_cast<int>(q)) = wedge_pairing(W, forms[q]);
  }
  Cochain Wbar = wedge(limit, limit);
  for (size_t q = 0; q < forms.size(); ++q) {
    std::vector<double> ys(family.size());
    for (size_t m = 0; m < family.size(); ++m) ys[m] = rep.pairings(static_cast<int>(m), static_cast<int>(q));
    rep.extrapolated.push_back(extrapolate_to_zero(abscissas, ys));
    rep.predicted.push_back(wedge_pairing(Wbar, forms[q]));
    rep.defect.push_back(std::abs(rep.extrapolated.back() - rep.predicted.back()));
    rep.max_defect = std::max(rep.max_defect, rep.defect.back());
  }
  return rep;
}

// Per-member W^{-1,2} proxy of d(Omega_j - limit) through the (Delta+1)
// lift: the compactness hypothesis of the div-curl machinery.
inline std::vector<double> divcurl_report(const std::vector<Cochain>& family,
                                          const Cochain& limit) {
  NormContext ctx(*limit.grid);
  std::vector<double> proxies;
  for (const Cochain& w : family)
    proxies.push_back(wminus1p_norm(ctx, exterior_d(w - limit), 2.0));
  return proxies;
}

}  // namespace gaugedec
