// Batch front door: configuration parsing, run orchestration, persistence,
// and emission of plot-ready data and summary tables.

#include <CLI11.hpp>

#include <cstdio>

#include "nlspc/records.hpp"

namespace {

using namespace nlspc;

struct CliArgs {
  std::string config_path;
  std::string out_dir;
  int threads = 0;      // 0: take from config
  std::string grid;     // "NxM"
  double extent = 0.0;  // overrides both extents
};

RunConfig load_config(const CliArgs& args, const std::string& command) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = RunConfig::from_file(args.config_path);
  if (!args.out_dir.empty()) cfg.set("output.dir", args.out_dir);
  if (args.threads > 0) cfg.set("output.threads", std::to_string(args.threads));
  if (!args.grid.empty()) {
    auto x = args.grid.find('x');
    require(x != std::string::npos, "--grid expects NxM");
    cfg.set("grid.nr", args.grid.substr(0, x));
    cfg.set("grid.nz", args.grid.substr(x + 1));
  }
  if (args.extent > 0) {
    cfg.set("grid.rmax", std::to_string(args.extent));
    cfg.set("grid.zmax", std::to_string(args.extent));
  }
  cfg.set("command", command);
  return cfg;
}

ProblemParams problem_from(const RunConfig& cfg) {
  return ProblemParams(cfg.get_num("problem.p", 3.0),
                       cfg.get_num("problem.mu", 1.0),
                       cfg.get_num("problem.tau", 1.0));
}

SolverOptions solver_from(const RunConfig& cfg) {
  SolverOptions o;
  o.flow_tol = cfg.get_num("solve.flow_tol", o.flow_tol);
  o.newton_tol = cfg.get_num("solve.newton_tol", o.newton_tol);
  o.max_flow_iters = cfg.get_int("solve.max_flow_iters", o.max_flow_iters);
  o.dt0 = cfg.get_num("solve.dt0", o.dt0);
  return o;
}

GridPtr grid_from(const RunConfig& cfg, const ProblemParams& prm,
                  const SolitonProfile* prof, bool for_mpass) {
  if (cfg.get_int("grid.auto", 1) != 0) {
    int quality = cfg.get_int("solve.quality", 1);
    if (for_mpass && prof) return mpass_grid(prm.p, prm.mu, *prof, quality);
    return ground_grid(prm.p, prm.mu, quality);
  }
  return build_grid(cfg.get_int("grid.nr", 144), cfg.get_int("grid.nz", 256),
                    cfg.get_num("grid.rmax", 9.0), cfg.get_num("grid.zmax", 64.0));
}

Constants assemble_constants(double p, const SolitonProfile& prof,
                             double lambda_measured) {
  Constants cst;
  cst.p = p;
  cst.lambda0 = 2.0;
  cst.lambda0_measured = lambda_measured;
  cst.gn_constant = gn_constant_from_Q(prof);
  cst.mu1 = mu1_threshold(cst.gn_constant, cst.lambda0, p);
  cst.omega1 = omega_for_mass(1.0, prof);
  cst.nu_exponent = -(5.0 - p) / (3.0 * p - 7.0);
  cst.nu_coeff = (3.0 * p - 7.0) / (6.0 * p - 6.0) *
                 std::pow(cst.gn_constant * (3.0 * p - 3.0) / (2.0 * p + 2.0),
                          -4.0 / (3.0 * p - 7.0));
  cst.shoot_tol = prof.shoot_tol;
  cst.q0 = prof.q0;
  cst.mass_Q = prof.mass_Q;
  return cst;
}

int cmd_constants(const CliArgs& args) {
  RunConfig cfg = load_config(args, "constants");
  double p = cfg.get_num("problem.p", 3.0);
  require(p > 7.0 / 3.0 && p < 5.0, "constants: p outside (7/3, 5)");
  OutputSink sink(cfg.get_str("output.dir", "out"), cfg, "constants");

  SolitonProfile prof = shoot_Q(p, cfg.get_num("solve.shoot_tol", 1e-13));

  // spectral cross-check: fixed-spacing truncation sweep, 1/R^2 limit
  double h = cfg.get_num("sweep.fixed_h", 0.05);
  auto extents = cfg.get_list("sweep.extents", {4.0, 6.0, 8.0, 12.0});
  std::vector<double> exts, lams;
  for (double R : extents) {
    int n = int(std::lround(R / h)) + 1;
    auto g = build_grid(n, n, (n - 1) * h, (n - 1) * h);
    EigenResult eig = first_eigenpair(g);
    exts.push_back((n - 1) * h);
    lams.push_back(eig.eigenvalue);
  }
  double lam_inf = extrapolate_lambda(exts, lams);
  Constants cst = assemble_constants(p, prof, lam_inf);

  // self-consistency of the threshold formula
  double mu1_re = mu1_threshold(cst.gn_constant, cst.lambda0, p);
  if (std::abs(mu1_re - cst.mu1) > 1e-12 * cst.mu1)
    sink.add_failure("mu1 self-consistency check failed");
  if (std::abs(lam_inf - 2.0) > 1e-3)
    sink.add_failure("extrapolated spectral floor differs from 2 beyond 1e-3");
  for (std::size_t k = 0; k + 1 < lams.size(); ++k)
    if (!(lams[k] > lams[k + 1]))
      sink.add_failure("truncated eigenvalues not strictly decreasing");

  sink.add_manifest("constants", to_json(cst));
  sink.add_record(to_json(cst));
  sink.add_dat("lambda_extent.dat", "extent  first_eigenvalue", exts, lams);
  {
    std::vector<double> qr(prof.r.begin(), prof.r.end()),
        qv(prof.q.begin(), prof.q.end());
    sink.add_dat("Q.dat", "r  Q(r)", qr, qv);
  }
  std::string err;
  if (!sink.flush(&err)) {
    std::fprintf(stderr, "%s\n", err.c_str());
    return 2;
  }
  std::printf("p        = %.6f\n", p);
  std::printf("Lambda0  = 2 (measured %.6f)\n", lam_inf);
  std::printf("C_{p+1}  = %.8f\n", cst.gn_constant);
  std::printf("mu1      = %.8f\n", cst.mu1);
  std::printf("omega1   = %.6f\n", cst.omega1);
  std::printf("nu bound = %.6f * mu^%.4f\n", cst.nu_coeff, cst.nu_exponent);
  return sink.failed() ? 1 : 0;
}

int cmd_ground(const CliArgs& args) {
  RunConfig cfg = load_config(args, "ground");
  ProblemParams prm = problem_from(cfg);
  OutputSink sink(cfg.get_str("output.dir", "out"), cfg, "ground");

  auto g = grid_from(cfg, prm, nullptr, false);
  EigenResult eig = first_eigenpair(g);
  SolverOptions o = solver_from(cfg);
  o.level_ref = eig.eigenvalue;

  SolveResult r = solve_ground(prm, g, reduced_ground_guess(prm, g), o);
  r.lambda_domain = eig.eigenvalue;

  if (!r.converged) sink.add_failure("ground solve did not converge: " + r.note);
  if (!(r.report.g_indicator > 0)) sink.add_failure("not inside the Pohozaev set");
  if (!(r.report.energy < 0.5 * eig.eigenvalue * prm.mu))
    sink.add_failure("energy not below the separating level");
  if (!(std::abs(r.report.pohozaev_residual) / r.report.kinetic <= 5e-3))
    sink.add_failure("Pohozaev residual above 5e-3 relative");
  if (!(r.multiplier > -eig.eigenvalue))
    sink.add_failure("multiplier below the spectral floor");

  sink.add_record(to_json(r));
  sink.add_field_dump("u1.dat", r.field);
  sink.add_csv("summary.csv",
               {"mu", "energy", "multiplier", "g_indicator", "pohozaev_rel",
                "plugback", "lambda_domain"},
               {{prm.mu, r.report.energy, r.multiplier, r.report.g_indicator,
                 std::abs(r.report.pohozaev_residual) / r.report.kinetic,
                 r.plugback, eig.eigenvalue}});
  std::string err;
  if (!sink.flush(&err)) {
    std::fprintf(stderr, "%s\n", err.c_str());
    return 2;
  }
  std::printf("ground: E = %.8f  lambda = %.8f  plugback = %.3e  %s\n",
              r.report.energy, r.multiplier, r.plugback,
              sink.failed() ? "FAIL" : "ok");
  return sink.failed() ? 1 : 0;
}

int cmd_mpass(const CliArgs& args) {
  RunConfig cfg = load_config(args, "mpass");
  ProblemParams prm = problem_from(cfg);
  OutputSink sink(cfg.get_str("output.dir", "out"), cfg, "mpass");

  SolitonProfile prof = shoot_Q(prm.p);
  Constants cst = assemble_constants(prm.p, prof, 0.0);
  if (!(prm.mu < cst.mu1))
    sink.add_failure("mu above the two-solution threshold mu1");

  auto g1 = grid_from(cfg, prm, nullptr, false);
  EigenResult eig1 = first_eigenpair(g1);
  SolverOptions o = solver_from(cfg);
  o.level_ref = eig1.eigenvalue;
  SolveResult u1 = solve_ground(prm, g1, reduced_ground_guess(prm, g1), o);
  u1.lambda_domain = eig1.eigenvalue;

  auto g2 = grid_from(cfg, prm, &prof, true);
  EigenResult eig2 = first_eigenpair(g2);
  MPassConfig mc;
  mc.n_nodes = cfg.get_int("mpass.nodes", mc.n_nodes);
  mc.path_iters = cfg.get_int("mpass.path_iters", mc.path_iters);
  mc.tau_schedule = cfg.get_list("mpass.tau_schedule", mc.tau_schedule);
  double defl = cfg.get_num("mpass.deflation", 0.0);
  if (defl > 0) mc.deflation_distance = defl;
  SolveResult u2 = solve_mountain_pass(prm, g2, mc, prof, &u1, eig2.eigenvalue);
  u2.lambda_domain = eig2.eigenvalue;

  if (!u2.converged) sink.add_failure("mountain pass did not converge: " + u2.note);
  DistinctnessReport dr = distinctness_check(u1, u2, mc.deflation(prm.mu));
  if (!dr.ordering_ok) sink.add_failure("level ordering violated");
  if (!dr.multipliers_ok) sink.add_failure("a multiplier sits below its spectral floor");
  if (!dr.distance_ok) sink.add_failure("solutions not distinct");

  // independent min-max upper bound from the optimized dilation path
  SeparableSolver sep(g2);
  TransverseGround tg = transverse_ground(*g2);
  Endpoints ep = make_endpoints(prm, g2, eig2.eigenvalue);
  Path path = dilation_path(ep.w0, 1.0, ep.t1, mc.n_nodes, prm);
  path = optimize_path(std::move(path), prm, mc.path_iters, &sep,
                       tg.alpha0 + sep.beta0());
  double nu = nu_lower_bound(prm, cst);
  if (!(u2.report.energy >= nu * 0.95))
    sink.add_failure("excited level fell below the boundary-level bound");
  if (!(u2.report.energy <= path.max_energy() * (1.0 + 1e-6)))
    sink.add_failure("excited level above the optimized path maximum");

  sink.add_record(to_json(u1));
  sink.add_record(to_json(u2));
  sink.add_manifest("distinctness", to_json(dr));
  sink.add_manifest("minmax", json{{"nu_lower", nu},
                                   {"path_max", path.max_energy()},
                                   {"nodes", int(path.nodes.size())}});
  sink.add_field_dump("u2.dat", u2.field);
  {
    std::vector<double> xs(path.nodes.size()), es(path.nodes.size());
    for (std::size_t k = 0; k < path.nodes.size(); ++k) {
      xs[k] = double(k);
      es[k] = path.node_energies[k];
    }
    sink.add_dat("path_energy.dat", "node_index  energy", xs, es);
  }
  sink.add_csv("summary.csv",
               {"mu", "e1", "e2", "lambda1", "lambda2", "l2_distance",
                "nu_lower", "path_max"},
               {{prm.mu, dr.e1, dr.e2, dr.lambda1, dr.lambda2, dr.l2_distance,
                 nu, path.max_energy()}});
  std::string err;
  if (!sink.flush(&err)) {
    std::fprintf(stderr, "%s\n", err.c_str());
    return 2;
  }
  std::printf("mpass: E1 = %.6f  E2 = %.6f  sandwich [%.6f, %.6f]  %s\n",
              dr.e1, dr.e2, nu, path.max_energy(),
              sink.failed() ? "FAIL" : "ok");
  return sink.failed() ? 1 : 0;
}

int cmd_domain_study(const CliArgs& args) {
  RunConfig cfg = load_config(args, "domain-study");
  ProblemParams prm = problem_from(cfg);
  OutputSink sink(cfg.get_str("output.dir", "out"), cfg, "domain-study");
  int threads = cfg.get_int("output.threads", 1);

  SolitonProfile prof = shoot_Q(prm.p);
  auto extents = cfg.get_list("sweep.extents", {6.0, 8.0, 10.0, 12.0});
  double h = cfg.get_num("sweep.fixed_h", 0.05);
  DomainSweepResult sweep =
      domain_sweep(prm, extents, h, prof, solver_from(cfg), threads);

  for (const auto& f : sweep.failures) sink.add_failure(f);
  std::vector<std::vector<double>> rows;
  std::vector<double> xs, cs, ms, ls;
  for (const auto& r : sweep.records) {
    sink.add_record(to_json(r));
    rows.push_back({r.control, r.lambda_domain, r.c_level, r.m_level,
                    r.lambda1, r.lambda2});
    xs.push_back(r.control);
    cs.push_back(r.c_level);
    ms.push_back(r.m_level);
    ls.push_back(r.lambda_domain);
  }
  sink.add_csv("summary.csv",
               {"extent", "lambda", "c_level", "m_level", "lambda1", "lambda2"},
               rows);
  sink.add_dat("lambda.dat", "extent  first_eigenvalue", xs, ls);
  sink.add_dat("c_level.dat", "extent  ground_level", xs, cs);
  sink.add_dat("m_level.dat", "extent  excited_level", xs, ms);
  sink.add_manifest("extrapolation",
                    json{{"c_limit", sweep.c_extrapolated},
                         {"c_limit_prev", sweep.c_extrapolated_prev},
                         {"lambda_limit", sweep.lambda_extrapolated}});
  std::string err;
  if (!sink.flush(&err)) {
    std::fprintf(stderr, "%s\n", err.c_str());
    return 2;
  }
  std::printf("domain-study: %zu extents, c -> %.8f, Lambda -> %.6f  %s\n",
              sweep.records.size(), sweep.c_extrapolated,
              sweep.lambda_extrapolated, sink.failed() ? "FAIL" : "ok");
  return sink.failed() ? 1 : 0;
}

int cmd_mu_sweep(const CliArgs& args) {
  RunConfig cfg = load_config(args, "mu-sweep");
  double p = cfg.get_num("problem.p", 3.0);
  OutputSink sink(cfg.get_str("output.dir", "out"), cfg, "mu-sweep");
  int threads = cfg.get_int("output.threads", 1);

  SolitonProfile prof = shoot_Q(p);
  auto mus = cfg.get_list("sweep.mus", {0.08, 0.04, 0.02, 0.01});
  MuSweepResult sweep = mu_sweep(p, mus, prof, cfg.get_int("solve.quality", 1),
                                 solver_from(cfg), threads);

  double slope_target = -(2.0 * p - 2.0) / (3.0 * p - 7.0);
  if (std::abs(sweep.lambda2_slope - slope_target) > 0.1)
    sink.add_failure("multiplier growth exponent off target");
  if (std::abs(sweep.lambda2_scaled_last - sweep.omega1) > 0.1 * sweep.omega1)
    sink.add_failure("scaled multiplier away from omega1 at the smallest mass");
  for (const auto& f : sweep.failures) sink.add_failure(f);

  std::vector<std::vector<double>> rows;
  std::vector<double> xs, l2s, hr, rd;
  for (const auto& r : sweep.records) {
    sink.add_record(to_json(r));
    rows.push_back({r.control, r.lambda1, r.lambda2, r.h_ratio,
                    r.rescaled_distance, r.c_level, r.m_level});
    xs.push_back(r.control);
    l2s.push_back(r.lambda2);
    hr.push_back(r.h_ratio);
    rd.push_back(r.rescaled_distance);
  }
  sink.add_csv("summary.csv",
               {"mu", "lambda1", "lambda2", "h_ratio", "rescaled_distance",
                "c_level", "m_level"},
               rows);
  sink.add_dat("lambda2.dat", "mu  lambda2", xs, l2s);
  sink.add_dat("h_ratio.dat", "mu  perp_H_norm_over_sqrt_mu", xs, hr);
  sink.add_dat("rescaled_distance.dat", "mu  distance_to_limit_profile", xs, rd);
  sink.add_manifest("fit", json{{"lambda2_slope", sweep.lambda2_slope},
                                {"slope_target", slope_target},
                                {"omega1", sweep.omega1},
                                {"lambda2_scaled_last", sweep.lambda2_scaled_last}});
  std::string err;
  if (!sink.flush(&err)) {
    std::fprintf(stderr, "%s\n", err.c_str());
    return 2;
  }
  std::printf("mu-sweep: slope = %.4f (target %.4f)  lambda2*mu^s = %.4f (omega1 %.4f)  %s\n",
              sweep.lambda2_slope, slope_target, sweep.lambda2_scaled_last,
              sweep.omega1, sink.failed() ? "FAIL" : "ok");
  return sink.failed() ? 1 : 0;
}

int cmd_check(const CliArgs& args) {
  RunConfig cfg = load_config(args, "check");
  OutputSink sink(cfg.get_str("output.dir", "out"), cfg, "check");
  int bad = 0;
  auto check = [&](bool ok, const std::string& what) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what.c_str());
    if (!ok) {
      ++bad;
      sink.add_failure(what);
    }
  };

  auto g = build_grid(96, 96, 8.0, 8.0);
  {
    std::vector<double> one(g->size(), 1.0);
    double vol = integrate(*g, one);
    check(std::abs(vol - 2.0 * kPi * 64.0 * 8.0) <= 1e-10 * vol,
          "quadrature: cylinder volume identity");
  }
  {
    Field f = tensor_field(
        g, [](double r) { return std::exp(-r * r); },
        [](double z) { return std::exp(-z * z); });
    double I = integrate(f);
    check(std::abs(I - std::pow(kPi, 1.5)) <= 1e-5 * I,
          "quadrature: separable Gaussian");
  }
  {
    Field a = random_bump_field(g, 11), b = random_bump_field(g, 12);
    double s1 = inner(apply_H(a, 0.0, 0.0, 3.0), b);
    double s2 = inner(a, apply_H(b, 0.0, 0.0, 3.0));
    check(std::abs(s1 - s2) <= 1e-10 * std::abs(s1), "operator symmetry");
  }
  {
    SolitonProfile prof = shoot_Q(3.0);
    check(prof.ode_sup_residual <= 1e-8, "soliton plug-back residual");
    double gfree = prof.kinetic_Q - 0.75 * prof.nonlin_Q;
    check(std::abs(gfree) <= 1e-6 * prof.kinetic_Q, "free-space virial identity");
  }
  {
    auto gg = build_grid(128, 128, 10.0, 10.0);
    EigenResult eig = first_eigenpair(gg);
    check(std::abs(eig.eigenvalue - 2.0 - sq(kPi / 20.0)) < 5e-3,
          "first eigenvalue of the truncated operator");
  }
  sink.add_manifest("checks_failed", bad);
  std::string err;
  sink.flush(&err);
  return bad == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"solver suite for normalized states of the cubic-range NLS "
               "with partial harmonic confinement"};
  app.require_subcommand(1);
  CliArgs args;
  app.add_option("--config", args.config_path, "key=value configuration file");
  app.add_option("--out", args.out_dir, "output directory");
  app.add_option("--threads", args.threads, "sweep-level worker threads");
  app.add_option("--grid", args.grid, "grid size NxM (disables auto sizing)");
  app.add_option("--extent", args.extent, "domain extent override");

  auto* c1 = app.add_subcommand("constants", "soliton + spectral constants");
  auto* c2 = app.add_subcommand("ground", "local-minimum branch solve");
  auto* c3 = app.add_subcommand("mpass", "mountain-pass branch solve");
  auto* c4 = app.add_subcommand("domain-study", "truncation-limit sweep");
  auto* c5 = app.add_subcommand("mu-sweep", "small-mass asymptotics sweep");
  auto* c6 = app.add_subcommand("check", "fast self-test bundle");

  CLI11_PARSE(app, argc, argv);
  try {
    if (c1->parsed()) return cmd_constants(args);
    if (c2->parsed()) return cmd_ground(args);
    if (c3->parsed()) return cmd_mpass(args);
    if (c4->parsed()) return cmd_domain_study(args);
    if (c5->parsed()) return cmd_mu_sweep(args);
    if (c6->parsed()) return cmd_check(args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
