// JSON / CSV serialization of the experiment reports.
#pragma once

#include <cstdio>
#include <string>

#include "gaugedec/constants.hpp"
#include "gaugedec/immersion.hpp"
#include "gaugedec/io.hpp"
#include "gaugedec/smoothing.hpp"
#include "gaugedec/stability.hpp"

namespace gaugedec {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Json to_json(const ConstantsCertificate& c) {
  Json j;
  j["mu"] = c.mu;
  j["gaffney"] = c.gaffney;
  j["k1"] = c.k1;
  j["probes"] = c.probes;
  j["kappa1"] = c.kappa1;
  j["kappa0"] = c.kappa0;
  j["p"] = c.p;
  j["grid_hash"] = c.grid_hash;
  j["flavor"] = c.flavor;
  return j;
}

inline ConstantsCertificate certificate_from_json(const Json& j) {
  ConstantsCertificate c;
  c.mu = j.at("mu").get<double>();
  c.gaffney = j.at("gaffney").get<double>();
  c.k1 = j.at("k1").get<double>();
  c.probes = j.at("probes").get<int>();
  c.kappa1 = j.at("kappa1").get<double>();
  c.kappa0 = j.at("kappa0").get<double>();
  c.p = j.at("p").get<double>();
  c.grid_hash = j.at("grid_hash").get<std::string>();
  c.flavor = j.at("flavor").get<std::string>();
  return c;
}

inline Json to_json(const SolveReport& r) {
  return Json{{"iterations", r.iterations},
              {"residual", r.residual},
              {"harmonic_removed", r.harmonic_removed}};
}

inline Json to_json(const SmallnessReport& r) {
  Json j;
  j["omega_lp"] = r.omega_lp;
  j["f_wminus1p"] = r.f_wminus1p;
  j["kappa0"] = r.kappa0;
  j["margin"] = r.margin;
  j["kappa0_prime"] = r.kappa0_prime;
  j["poincare_side"] = r.poincare_side;
  j["poincare_ok"] = r.poincare_ok;
  j["pass"] = r.pass;
  return j;
}

inline Json to_json(const EpsilonRecord& r) {
  Json j;
  j["eps"] = r.eps;
  j["picard_iterations"] = r.picard_iterations;
  j["rho"] = r.rho;
  j["converged"] = r.converged;
  j["diverged"] = r.diverged;
  j["o_eps"] = r.o_eps;
  j["rapid_enough"] = r.rapid_enough;
  j["dpsi_l2"] = r.dpsi_l2;
  j["psi_w12"] = r.psi_w12;
  j["curvature_residual"] = r.curvature_residual;
  j["curvature_bound"] = r.curvature_bound;
  j["curvature_ok"] = r.curvature_ok;
  j["closedness_ok"] = r.closedness_ok;
  j["omega_err_lp"] = r.omega_err_lp;
  j["phi_err_lp"] = r.phi_err_lp;
  j["spectral_indicator_psi"] = r.spectral_indicator_psi;
  return j;
}

inline Json to_json(const SmoothingReport& r) {
  Json j;
  j["smallness"] = to_json(r.smallness);
  j["records"] = Json::array();
  for (const auto& rec : r.records) j["records"].push_back(to_json(rec));
  j["thinned"] = r.thinned;
  j["spectral_indicator_psi0"] = r.spectral_indicator_psi0;
  j["split_residual"] = r.split_residual;
  j["all_contracting"] = r.all_contracting;
  j["all_curvature_ok"] = r.all_curvature_ok;
  j["monotone"] = r.monotone;
  return j;
}

// one row per epsilon, plot-ready
inline std::string smoothing_csv(const SmoothingReport& r) {
  std::string s =
      "eps,picard_iterations,rho,o_eps,dpsi_l2,curvature_residual,omega_err_lp,phi_err_lp,"
      "spectral_indicator_psi,converged\n";
  for (const auto& rec : r.records) {
    s += fmt17(rec.eps) + "," + std::to_string(rec.picard_iterations) + "," + fmt17(rec.rho) +
         "," + fmt17(rec.o_eps) + "," + fmt17(rec.dpsi_l2) + "," +
         fmt17(rec.curvature_residual) + "," + fmt17(rec.omega_err_lp) + "," +
         fmt17(rec.phi_err_lp) + "," + fmt17(rec.spectral_indicator_psi) + "," +
         (rec.converged ? "1" : "0") + "\n";
  }
  return s;
}

inline Json to_json(const HodgeSplit& s) {
  Json j;
  j["reconstruction_residual"] = s.reconstruction_residual;
  j["dpsi_l2"] = s.dpsi_l2;
  j["psi_w12"] = s.psi_w12;
  j["normal_trace_defect"] = s.normal_trace_defect;
  j["psi_solve"] = to_json(s.psi_report);
  j["phi_solve"] = to_json(s.phi_report);
  return j;
}

inline Json to_json(const CompatibilityReport& r) {
  Json j;
  j["first_structure"] = r.first_structure;
  j["second_structure"] = r.second_structure;
  j["gauss"] = r.gauss;
  j["codazzi"] = r.codazzi;
  j["ricci"] = r.ricci;
  return j;
}

inline Json to_json(const WeakLimitReport& r) {
  Json j;
  j["forms"] = r.form_ids;
  j["abscissas"] = r.abscissas;
  j["extrapolated"] = r.extrapolated;
  j["predicted"] = r.predicted;
  j["defect"] = r.defect;
  j["max_defect"] = r.max_defect;
  return j;
}

// rows (member index, test-form id, pairing value)
inline std::string stability_csv(const WeakLimitReport& r, const std::vector<int>& js) {
  std::string s = "j,form,pairing\n";
  for (int m = 0; m < r.pairings.rows(); ++m)
    for (int q = 0; q < r.pairings.cols(); ++q)
      s += std::to_string(js[m]) + "," + r.form_ids[q] + "," + fmt17(r.pairings(m, q)) + "\n";
  return s;
}

inline std::string ply_text(const std::vector<Eigen::VectorXd>& positions) {
  int dim = positions.empty() ? 3 : static_cast<int>(positions[0].size());
  static const char* names[5] = {"x", "y", "z", "w4", "w5"};
  std::string s = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(positions.size()) +
                  "\n";
  for (int d = 0; d < dim; ++d) s += std::string("property double ") + names[d] + "\n";
  s += "end_header\n";
  for (const auto& p : positions) {
    for (int d = 0; d < dim; ++d) s += fmt17(p(d)) + (d + 1 < dim ? " " : "");
    s += "\n";
  }
  return s;
}

}  // namespace gaugedec
