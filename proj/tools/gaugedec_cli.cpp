// gaugedec batch front door: structured JSON config in, experiment
// artifacts out (cochain files, JSON/CSV reports, manifests).
//
// Commands: smooth | decompose | constants | immerse | stability |
//           curvature | fixture
// Flags:    --config <path> --seed <int> --out <dir> --override-smallness
// Env:      GAUGEDEC_CACHE_DIR caches constants certificates keyed by
//           (grid hash, p, flavor).
//
// Scientific "fail" verdicts (smallness violated, non-contraction, broken
// compatibility) exit 0 with the verdict recorded in the manifest; nonzero
// exits are reserved for config/solver/io hard failures.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "gaugedec/fixtures.hpp"
#include "gaugedec/reports.hpp"

namespace fs = std::filesystem;
using namespace gaugedec;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool override_smallness = false;
};

struct Experiment {
  Json raw;
  std::string config_hash;
  std::shared_ptr<Grid> grid;
  LieAlgebra algebra{1, Flavor::u1};
  double p = 4.0, q = 2.0;
  int s = 0;
  std::vector<double> epsilons = {0.4, 0.2, 0.1, 0.05};
  double fixed_point_tol = 1e-8, solver_tol = 1e-10;
  std::uint64_t seed = 1;
  bool override_smallness = false;
  fs::path out;

  fs::path input(const std::string& key) const {
    if (!raw.contains("inputs") || !raw["inputs"].contains(key))
      throw std::runtime_error("config field inputs." + key + " is required for this command");
    return fs::path(raw["inputs"][key].get<std::string>());
  }
  bool has_input(const std::string& key) const {
    return raw.contains("inputs") && raw["inputs"].contains(key);
  }
};

Experiment load_experiment(const CliOptions& opt, bool need_grid) {
  Experiment ex;
  std::string bytes;
  try {
    bytes = read_file(opt.config_path);
    ex.raw = Json::parse(bytes);
  } catch (const std::exception& e) {
    throw std::runtime_error("config " + opt.config_path + ": " + e.what());
  }
  ex.config_hash = hash_bytes(bytes);
  ex.out = fs::path(opt.out_dir);

  if (ex.raw.contains("grid")) {
    const Json& gj = ex.raw["grid"];
    std::array<int, 3> counts = {1, 1, 1};
    for (size_t a = 0; a < gj.at("counts").size(); ++a) counts[a] = gj.at("counts")[a].get<int>();
    ex.grid = std::make_shared<Grid>(
        gj.at("n").get<int>(), counts, gj.at("h").get<double>(),
        gj.at("topology").get<std::string>() == "torus" ? Topology::torus : Topology::box);
  } else if (need_grid) {
    throw std::runtime_error("config field grid is required for this command");
  }

  if (ex.raw.contains("algebra")) {
    const Json& aj = ex.raw["algebra"];
    ex.algebra = LieAlgebra(aj.at("m").get<int>(),
                            flavor_from_string(aj.at("flavor").get<std::string>()));
  }
  if (ex.raw.contains("exponents")) {
    const Json& ej = ex.raw["exponents"];
    if (ej.contains("p")) ex.p = ej["p"].get<double>();
    if (ej.contains("q")) ex.q = ej["q"].get<double>();
    if (ej.contains("s")) ex.s = ej["s"].get<int>();
  }
  if (ex.grid && ex.p <= ex.grid->dimension())
    throw std::runtime_error(
        "config field exponents.p: the smallness hypothesis requires p > n (got p = " +
        std::to_string(ex.p) + ", n = " + std::to_string(ex.grid->dimension()) + ")");
  if (ex.q < ex.p / 2)
    throw std::runtime_error("config field exponents.q: requires q >= p/2");
  if (ex.raw.contains("epsilons")) ex.epsilons = ex.raw["epsilons"].get<std::vector<double>>();
  if (ex.raw.contains("tolerances")) {
    const Json& tj = ex.raw["tolerances"];
    if (tj.contains("fixed_point")) ex.fixed_point_tol = tj["fixed_point"].get<double>();
    if (tj.contains("solver")) ex.solver_tol = tj["solver"].get<double>();
  }
  if (ex.raw.contains("seed")) ex.seed = ex.raw["seed"].get<std::uint64_t>();
  if (opt.seed) ex.seed = *opt.seed;
  ex.override_smallness = opt.override_smallness;
  if (ex.raw.contains("options") && ex.raw["options"].contains("override_smallness"))
    ex.override_smallness |= ex.raw["options"]["override_smallness"].get<bool>();
  return ex;
}

fs::path cache_dir(const Experiment& ex) {
  if (const char* env = std::getenv("GAUGEDEC_CACHE_DIR")) return fs::path(env);
  return ex.out / "cache";
}

// Certificate from explicit input path, cache, or a fresh run (cached).
ConstantsCertificate obtain_certificate(const Experiment& ex, Manifest& manifest) {
  if (ex.has_input("constants")) {
    fs::path p = ex.input("constants");
    ConstantsCertificate cert = certificate_from_json(Json::parse(read_file(p)));
    manifest.add_input(p);
    return cert;
  }
  fs::path dir = cache_dir(ex);
  std::string key = grid_hash(*ex.grid) + "_p" + fmt17(ex.p) + "_" +
                    to_string(ex.algebra.flavor()) + ".json";
  fs::path cached = dir / key;
  if (fs::exists(cached)) {
    ConstantsCertificate cert = certificate_from_json(Json::parse(read_file(cached)));
    manifest.add_input(cached);
    return cert;
  }
  ConstantsCertificate cert = certify(*ex.grid, ex.p, ex.algebra, 32, 2024);
  cert.grid_hash = grid_hash(*ex.grid);
  atomic_write(cached, to_json(cert).dump(2) + "\n");
  manifest.add_input(cached);
  return cert;
}

SmoothingConfig smoothing_config(const Experiment& ex, const ConstantsCertificate& cert) {
  SmoothingConfig cfg;
  cfg.p = ex.p;
  cfg.q = ex.q;
  cfg.s = ex.s;
  cfg.epsilons = ex.epsilons;
  cfg.fixed_point_tol = ex.fixed_point_tol;
  cfg.solver_tol = ex.solver_tol;
  cfg.override_smallness = ex.override_smallness;
  if (ex.raw.contains("options") && ex.raw["options"].contains("warm_start"))
    cfg.warm_start = ex.raw["options"]["warm_start"].get<bool>();
  cfg.adopt(cert);
  return cfg;
}

int run_fixture(const Experiment& ex) {
  Manifest manifest;
  manifest.config_hash = ex.config_hash;
  if (!ex.raw.contains("fixture"))
    throw std::runtime_error("config field fixture is required for this command");
  const Json& fj = ex.raw.at("fixture");
  std::string kind = fj.at("kind").get<std::string>();
  if ((kind == "abelian-rough" || kind == "su2-small" || kind == "sin-oscillation") && !ex.grid)
    throw std::runtime_error("config field grid is required for fixture kind " + kind);
  if (kind == "abelian-rough" || kind == "su2-small") {
    LieAlgebra alg = kind == "su2-small" ? LieAlgebra(4, Flavor::su2) : LieAlgebra(1, Flavor::u1);
    ConstantsCertificate cert = certify(*ex.grid, ex.p, alg, 32, 2024);
    cert.grid_hash = grid_hash(*ex.grid);
    double fraction = fj.value("target_fraction", 0.5);
    bool rough_psi = fj.value("rough_psi", false);
    ConnectionFixture fx =
        rough_connection(ex.grid, alg, ex.seed, fraction * cert.kappa0, ex.p, rough_psi);
    write_grid(ex.out / "grid.json", *ex.grid);
    write_cochain(ex.out / "omega.gcc", fx.omega);
    write_cochain(ex.out / "curvature.gcc", fx.F);
    atomic_write(ex.out / "certificate.json", to_json(cert).dump(2) + "\n");
    manifest.add_output(ex.out / "grid.json", "grid");
    manifest.add_output(ex.out / "omega.gcc", "cochain");
    manifest.add_output(ex.out / "curvature.gcc", "cochain");
    manifest.add_output(ex.out / "certificate.json", "constants");
    manifest.verdicts["target_lp"] = fraction * cert.kappa0;
    manifest.verdicts["measured_lp"] = lp_norm(fx.omega, ex.p);
  } else if (kind == "sphere-patch") {
    int N = fj.value("counts", 64);
    double R = fj.value("radius", 1.0);
    double w = fj.value("halfwidth", 0.35);
    double gs = fj.value("gauss_scale", 1.0);
    ImmersionFixture fx = sphere_patch(N, R, w, gs);
    write_immersion_data(ex.out / "patch.gim", fx.data);
    std::string ref;
    for (const auto& pnt : fx.reference)
      ref += fmt17(pnt(0)) + " " + fmt17(pnt(1)) + " " + fmt17(pnt(2)) + "\n";
    atomic_write(ex.out / "reference.txt", ref);
    manifest.add_output(ex.out / "patch.gim", "immersion-data");
    manifest.add_output(ex.out / "reference.txt", "reference");
  } else if (kind == "sin-oscillation") {
    LieAlgebra so3(3, Flavor::so);
    SequenceSpec spec;
    spec.frequencies = fj.value("frequencies", std::vector<int>{4, 8, 16, 32});
    spec.r = fj.value("r", 4.0);
    spec.A = Mat::Zero(3, 3);
    spec.B = Mat::Zero(3, 3);
    spec.A(0, 1) = 1;
    spec.A(1, 0) = -1;
    spec.B(1, 2) = 1;
    spec.B(2, 1) = -1;
    std::vector<Cochain> fam = oscillating_family(*ex.grid, so3, spec);
    write_grid(ex.out / "grid.json", *ex.grid);
    manifest.add_output(ex.out / "grid.json", "grid");
    for (size_t i = 0; i < fam.size(); ++i) {
      fs::path p = ex.out / ("omega_j" + std::to_string(spec.frequencies[i]) + ".gcc");
      write_cochain(p, fam[i]);
      manifest.add_output(p, "cochain");
    }
  } else {
    throw std::runtime_error("unknown fixture kind: " + kind);
  }
  write_manifest(ex.out / "manifest.json", manifest);
  return 0;
}

int run_curvature(const Experiment& ex) {
  Manifest manifest;
  manifest.config_hash = ex.config_hash;
  Cochain omega = read_cochain(ex.input("omega"), *ex.grid);
  manifest.add_input(ex.input("omega"));
  Cochain F = curvature(omega);
  write_cochain(ex.out / "curvature.gcc", F);
  NormContext ctx(*ex.grid);
  Json rep;
  rep["omega_lp"] = lp_norm(omega, ex.p);
  rep["omega_w1p"] = w1p_norm(omega, ex.p);
  rep["f_lp_half"] = lp_norm(F, std::max(1.0, ex.p / 2));
  rep["f_wminus1p"] = wminus1p_norm(ctx, F, ex.p);
  atomic_write(ex.out / "curvature_report.json", rep.dump(2) + "\n");
  manifest.add_output(ex.out / "curvature.gcc", "cochain");
  manifest.add_output(ex.out / "curvature_report.json", "report");
  write_manifest(ex.out / "manifest.json", manifest);
  return 0;
}

int run_decompose(const Experiment& ex) {
  Manifest manifest;
  manifest.config_hash = ex.config_hash;
  Cochain omega = read_cochain(ex.input("omega"), *ex.grid);
  Cochain F = read_cochain(ex.input("curvature"), *ex.grid);
  manifest.add_input(ex.input("omega"));
  manifest.add_input(ex.input("curvature"));
  HodgeSplit split = decompose(omega, F, ex.solver_tol, ex.p);
  write_cochain(ex.out / "phi.gcc", split.phi);
  write_cochain(ex.out / "psi.gcc", split.psi);
  write_cochain(ex.out / "eta.gcc", split.eta);
  atomic_write(ex.out / "split.json", to_json(split).dump(2) + "\n");
  manifest.add_output(ex.out / "phi.gcc", "cochain");
  manifest.add_output(ex.out / "psi.gcc", "cochain");
  manifest.add_output(ex.out / "eta.gcc", "cochain");
  manifest.add_output(ex.out / "split.json", "report");
  manifest.verdicts["reconstruction_residual"] = split.reconstruction_residual;
  write_manifest(ex.out / "manifest.json", manifest);
  return 0;
}

int run_constants(const Experiment& ex) {
  Manifest manifest;
  manifest.config_hash = ex.config_hash;
  ConstantsCertificate cert = obtain_certificate(ex, manifest);
  atomic_write(ex.out / "certificate.json", to_json(cert).dump(2) + "\n");
  manifest.add_output(ex.out / "certificate.json", "constants");
  manifest.verdicts["kappa0_le_kappa1"] = cert.kappa0 <= cert.kappa1;
  write_manifest(ex.out / "manifest.json", manifest);
  return 0;
}

int run_smooth(const Experiment& ex) {
  Manifest manifest;
  manifest.config_hash = ex.config_hash;
  Cochain omega = read_cochain(ex.input("omega"), *ex.grid);
  Cochain F = read_cochain(ex.input("curvature"), *ex.grid);
  manifest.add_input(ex.input("omega"));
  manifest.add_input(ex.input("curvature"));
  ConstantsCertificate cert = obtain_certificate(ex, manifest);
  SmoothingConfig cfg = smoothing_config(ex, cert);

  NormContext ctx(*ex.grid);
  SmallnessReport sm = smallness_check(omega, F, cfg, ctx);
  if (!sm.pass && !cfg.override_smallness) {
    // scientific fail: record the verdict, no family
    Json rep;
    rep["smallness"] = to_json(sm);
    atomic_write(ex.out / "report.json", rep.dump(2) + "\n");
    manifest.add_output(ex.out / "report.json", "report");
    manifest.verdicts["smallness_pass"] = false;
    manifest.verdicts["family_produced"] = false;
    write_manifest(ex.out / "manifest.json", manifest);
    return 0;
  }

  SmoothFamily fam = smooth_family(omega, F, cfg);
  Json report_json = to_json(fam.report);
  report_json["split"] = to_json(fam.split);
  atomic_write(ex.out / "report.json", report_json.dump(2) + "\n");
  atomic_write(ex.out / "report.csv", smoothing_csv(fam.report));
  manifest.add_output(ex.out / "report.json", "report");
  manifest.add_output(ex.out / "report.csv", "series");
  for (size_t i = 0; i < fam.members.size(); ++i) {
    fs::path p = ex.out / ("omega_eps_" + std::to_string(i) + ".gcc");
    write_cochain(p, fam.members[i]);
    manifest.add_output(p, "cochain");
  }
  manifest.verdicts["smallness_pass"] = fam.report.smallness.pass;
  manifest.verdicts["family_produced"] = true;
  manifest.verdicts["all_contracting"] = fam.report.all_contracting;
  manifest.verdicts["all_curvature_ok"] = fam.report.all_curvature_ok;
  manifest.verdicts["monotone"] = fam.report.monotone;
  write_manifest(ex.out / "manifest.json", manifest);
  return 0;
}

int run_immerse(const Experiment& ex) {
  Manifest manifest;
  manifest.config_hash = ex.config_hash;
  ImmersionData data = read_immersion_data(ex.input("patch"));
  manifest.add_input(ex.input("patch"));

  CompatibilityReport residuals = compatibility_residuals(data);
  CartanConnection cc = assemble_cartan(data);

  bool smooth_first = ex.raw.contains("immersion") &&
                      ex.raw["immersion"].value("smooth_first", false);
  Json smooth_note;
  if (smooth_first) {
    // mirror of the construction order: approximate the connection by a
    // smooth one with the same curvature before integrating, when the
    // smallness theory admits it
    ConstantsCertificate cert = certify(*data.grid, ex.p, cc.form.algebra, 32, 2024);
    SmoothingConfig cfg;
    cfg.p = ex.p;
    cfg.q = ex.q;
    cfg.epsilons = ex.epsilons;
    cfg.fixed_point_tol = ex.fixed_point_tol;
    cfg.solver_tol = ex.solver_tol;
    cfg.adopt(cert);
    NormContext ctx(*data.grid);
    Cochain Fc = curvature(cc.form);
    SmallnessReport sm = smallness_check(cc.form, Fc, cfg, ctx);
    smooth_note["smallness_pass"] = sm.pass;
    if (sm.pass) {
      SmoothFamily fam = smooth_family(cc.form, Fc, cfg);
      if (!fam.members.empty()) {
        cc.form = fam.members.back();
        smooth_note["applied_eps"] = fam.report.records.back().eps;
      }
    }
  }

  int dim = 2 + data.codim;
  FrameField ff = integrate_pfaff(*data.grid, cc.form, Mat::Identity(dim, dim));
  bool least_squares = ex.raw.contains("immersion") &&
                       ex.raw["immersion"].value("integration", std::string("tree")) ==
                           "least-squares";
  Immersion im = least_squares ? integrate_immersion_least_squares(data, cc, ff)
                               : integrate_immersion(data, cc, ff);
  atomic_write(ex.out / "iota.ply", ply_text(im.positions));

  Json rep;
  rep["residuals"] = to_json(residuals);
  rep["holonomy_defect"] = ff.holonomy_defect;
  rep["transport_mismatch"] = ff.transport_mismatch;
  rep["orthogonality_defect"] = ff.orthogonality_defect;
  rep["isometry_defect"] = im.isometry_defect;
  if (smooth_first) rep["smooth_first"] = smooth_note;
  if (ex.has_input("reference")) {
    std::vector<Eigen::VectorXd> ref;
    std::istringstream in(read_file(ex.input("reference")));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      Eigen::VectorXd v(dim);
      for (int d = 0; d < dim; ++d) ls >> v(d);
      ref.push_back(v);
    }
    manifest.add_input(ex.input("reference"));
    rep["aligned_sup_error"] = aligned_sup_error(im.positions, ref);
  }
  atomic_write(ex.out / "defects.json", rep.dump(2) + "\n");
  manifest.add_output(ex.out / "iota.ply", "vertices");
  manifest.add_output(ex.out / "defects.json", "report");
  manifest.verdicts["isometry_defect"] = im.isometry_defect;
  manifest.verdicts["gauss_residual"] = residuals.gauss;
  write_manifest(ex.out / "manifest.json", manifest);
  return 0;
}

int run_stability(const Experiment& ex) {
  Manifest manifest;
  manifest.config_hash = ex.config_hash;
  const Json& sj = ex.raw.at("stability");
  std::string family_kind = sj.value("family", "oscillation");
  LieAlgebra so3(3, Flavor::so);

  std::vector<Cochain> family;
  std::vector<int> js;
  std::vector<double> xs;
  Cochain limit = zero_cochain(*ex.grid, 1, so3);
  Mat direction(3, 3);
  direction << 0.3, 1.1, -0.4, 0.9, -0.2, 0.5, -0.7, 0.8, 0.1;  // generic

  if (family_kind == "oscillation") {
    SequenceSpec spec;
    spec.frequencies = sj.value("frequencies", std::vector<int>{4, 8, 16, 32});
    spec.r = sj.value("r", 4.0);
    spec.A = Mat::Zero(3, 3);
    spec.B = Mat::Zero(3, 3);
    spec.A(0, 1) = 1;
    spec.A(1, 0) = -1;
    spec.B(1, 2) = 1;
    spec.B(2, 1) = -1;
    family = oscillating_family(*ex.grid, so3, spec);
    js = spec.frequencies;
    for (int j : js) xs.push_back(static_cast<double>(j) * j);
    Mat comm = commutator(spec.A, spec.B);
    direction = comm / comm.squaredNorm();
  } else if (family_kind == "gauge") {
    Cochain omega = read_cochain(ex.input("omega"), *ex.grid);
    Cochain F = read_cochain(ex.input("curvature"), *ex.grid);
    manifest.add_input(ex.input("omega"));
    manifest.add_input(ex.input("curvature"));
    ConstantsCertificate cert = obtain_certificate(ex, manifest);
    SmoothingConfig cfg = smoothing_config(ex, cert);
    SmoothFamily fam = smooth_family(omega, F, cfg);
    family = fam.members;
    limit = omega;
    for (size_t i = 0; i < family.size(); ++i) {
      js.push_back(static_cast<int>(i));
      double e = fam.report.records[i].eps;
      xs.push_back(e * e);
    }
  } else {
    throw std::runtime_error("unknown stability family: " + family_kind);
  }

  std::vector<TestForm> forms = standard_test_forms(*ex.grid, direction);
  WeakLimitReport rep = weak_wedge_limit(family, xs, forms, limit);
  std::vector<double> proxies = divcurl_report(family, limit);

  Json out;
  out["weak_limit"] = to_json(rep);
  out["divcurl_proxy"] = proxies;
  double tol = sj.value("match_tolerance", 5e-9);
  bool matches = rep.max_defect <= tol;
  out["verdict"] = Json{{"family", family_kind},
                        {"wedge_limit_matches", matches},
                        {"max_defect", rep.max_defect},
                        {"proxy_final", proxies.empty() ? 0.0 : proxies.back()}};
  atomic_write(ex.out / "stability.json", out.dump(2) + "\n");
  atomic_write(ex.out / "stability.csv", stability_csv(rep, js));
  manifest.add_output(ex.out / "stability.json", "report");
  manifest.add_output(ex.out / "stability.csv", "series");
  manifest.verdicts["wedge_limit_matches"] = matches;
  write_manifest(ex.out / "manifest.json", manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete gauge-connection toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  CliOptions opt;
  app.add_option("--config", opt.config_path, "experiment config (json)")->required();
  app.add_option("--out", opt.out_dir, "output directory");
  std::int64_t seed_arg = -1;
  app.add_option("--seed", seed_arg, "override the config seed");
  app.add_flag("--override-smallness", opt.override_smallness,
               "run the family even when the smallness check fails");

  auto* c_smooth = app.add_subcommand("smooth", "curvature-preserving smoothing family");
  auto* c_decomp = app.add_subcommand("decompose", "hodge split of a connection");
  auto* c_const = app.add_subcommand("constants", "certified constants for a grid");
  auto* c_imm = app.add_subcommand("immerse", "immersion from fundamental forms");
  auto* c_stab = app.add_subcommand("stability", "weak-stability experiment");
  auto* c_curv = app.add_subcommand("curvature", "discrete curvature of a connection");
  auto* c_fix = app.add_subcommand("fixture", "generate reproducible inputs");

  CLI11_PARSE(app, argc, argv);
  if (seed_arg >= 0) opt.seed = static_cast<std::uint64_t>(seed_arg);

  try {
    bool need_grid = !c_imm->parsed() && !c_fix->parsed();
    Experiment ex = load_experiment(opt, need_grid);
    if (c_smooth->parsed()) return run_smooth(ex);
    if (c_decomp->parsed()) return run_decompose(ex);
    if (c_const->parsed()) return run_constants(ex);
    if (c_imm->parsed()) return run_immerse(ex);
    if (c_stab->parsed()) return run_stability(ex);
    if (c_curv->parsed()) return run_curvature(ex);
    if (c_fix->parsed()) return run_fixture(ex);
  } catch (const SolveFailure& e) {
    std::cerr << "solver failure: " << e.what() << " (residual " << e.residual << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
