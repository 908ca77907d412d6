#pragma once

#include <array>

#include "nlspc/newton.hpp"

namespace nlspc {

// --------------------------------------------------------------------------
// Initial data on the local-minimum branch

/// Transverse oscillator ground state times a mass-mu axial Gaussian,
/// axially dilated (widened) until the trial sits inside the Pohozaev set
/// below the separating level.  level_ref = 0 uses the analytic Lambda0 = 2;
/// truncated domains pass their own measured first eigenvalue.
inline Field initial_ground_guess(const ProblemParams& prm, const GridPtr& g,
                                  double level_ref = 0.0) {
  require(prm.mu > 0, "initial_ground_guess: mu must be positive");
  const double lam0 = level_ref > 0 ? level_ref : 2.0;
  const double target = 0.5 * lam0 * prm.mu;
  const double sigma0 = g->z_max / 6.0;

  std::vector<std::array<double, 3>> trace;
  for (double t = 1.0; t >= 1e-4; t *= 0.85) {
    const double sig = sigma0 / t;
    Field w = tensor_field(
        g, [](double r) { return std::exp(-0.5 * r * r) / std::sqrt(kPi); },
        [&](double z) { return std::exp(-0.5 * sq(z / sig)); });
    renormalize_mass(w, prm.mu);
    EnergyReport rep = evaluate(w, prm);
    if (rep.g_indicator > 0 && rep.energy < target) return w;
    trace.push_back({t, rep.energy, rep.g_indicator});
  }
  std::string msg = "initial_ground_guess: no admissible axial width; trace:";
  for (auto& e : trace)
    msg += " (t=" + std::to_string(e[0]) + ", E=" + std::to_string(e[1]) +
           ", g=" + std::to_string(e[2]) + ")";
  throw std::runtime_error(msg);
}

namespace detail {

/// 1-D axial operator -d2/dz2 with even reflection at z=0 and Dirichlet at
/// z_max, on the unknowns j = 0..nz-2.
struct AxialOperator {
  std::vector<double> sub, diag, sup;
  explicit AxialOperator(const CylGrid& g) {
    const int n = g.nz - 1;
    const double ihz2 = 1.0 / (g.hz * g.hz);
    sub.assign(n, -ihz2);
    diag.assign(n, 2.0 * ihz2);
    sup.assign(n, -ihz2);
    sub[0] = 0.0;
    sup[0] = -2.0 * ihz2;
  }
  void apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = diag.size();
    for (std::size_t j = 0; j < n; ++j) {
      double s = diag[j] * x[j];
      if (j > 0) s += sub[j] * x[j - 1];
      if (j + 1 < n) s += sup[j] * x[j + 1];
      y[j] = s;
    }
  }
};

}  // namespace detail

/// Solves the axial reduction -phi'' + ell phi = kappa phi^p at mass mu on
/// the grid's z-line and returns psi_transverse (x) phi.  A very accurate
/// ground-branch initializer: the transverse profile is exact for the
/// discrete operator and the axial profile solves the projected problem.
inline Field reduced_ground_guess(const ProblemParams& prm, const GridPtr& g) {
  const CylGrid& gr = *g;
  TransverseGround tg = transverse_ground(gr);

  // projected nonlinear coupling kappa = int psi^{p+1} over R^2
  double kappa = 0.0;
  for (int i = 0; i < gr.nr; ++i)
    kappa += gr.wr[i] * std::pow(tg.values[i], prm.p + 1.0);
  kappa *= 2.0 * kPi;

  // closed-form sech ansatz gives the starting frequency
  const double p = prm.p;
  double Sp = 2.0 * adaptive_simpson(
                        [&](double x) { return std::pow(1.0 / std::cosh(x), 4.0 / (p - 1.0)); },
                        0.0, 60.0, 1e-12);
  double expo = 2.0 / (p - 1.0) - 0.5;
  double omega0 = std::pow(
      prm.mu * (p - 1.0) / (2.0 * Sp) * std::pow(2.0 * kappa / (p + 1.0), 2.0 / (p - 1.0)),
      1.0 / expo);

  const int n = gr.nz - 1;
  std::vector<double> phi(n), w1(n);
  for (int j = 0; j < n; ++j) w1[j] = 2.0 * gr.wz[j];
  double A = std::pow(omega0 * (p + 1.0) / (2.0 * kappa), 1.0 / (p - 1.0));
  double B = std::sqrt(omega0) * (p - 1.0) / 2.0;
  for (int j = 0; j < n; ++j)
    phi[j] = A * std::pow(1.0 / std::cosh(B * gr.z[j]), 2.0 / (p - 1.0));

  auto dot1 = [&](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += w1[j] * a[j] * b[j];
    return s;
  };
  auto renorm = [&] {
    double s = std::sqrt(prm.mu / dot1(phi, phi));
    for (double& x : phi) x *= s;
  };
  renorm();

  detail::AxialOperator B1(gr);
  std::vector<double> F(n), Bphi(n), Td(n), a(n), b(n), cp(n), pn(n), cand(n);
  double ell = omega0;
  auto residual = [&](std::span<const double> ph, double l, std::span<double> out) {
    B1.apply(ph, Bphi);
    for (int j = 0; j < n; ++j)
      out[j] = Bphi[j] + l * ph[j] -
               kappa * std::pow(std::abs(ph[j]), p - 1.0) * ph[j];
  };
  // multiplier resync, then bordered Newton with two Thomas solves per step
  for (int it = 0; it < 80; ++it) {
    B1.apply(phi, Bphi);
    double nl = 0.0;
    for (int j = 0; j < n; ++j)
      nl += w1[j] * kappa * std::pow(std::abs(phi[j]), p + 1.0);
    ell = (nl - dot1(Bphi, phi)) / prm.mu;
    residual(phi, ell, F);
    double res = std::sqrt(dot1(F, F) / prm.mu);
    if (res <= 1e-12) break;
    for (int j = 0; j < n; ++j)
      pn[j] = ell - kappa * p * std::pow(std::abs(phi[j]), p - 1.0);
    for (int j = 0; j < n; ++j) Td[j] = B1.diag[j] + pn[j];
    for (int j = 0; j < n; ++j) a[j] = -F[j];
    thomas_solve(B1.sub, Td, B1.sup, a, cp);
    for (int j = 0; j < n; ++j) b[j] = phi[j];
    thomas_solve(B1.sub, Td, B1.sup, b, cp);
    double dl = dot1(phi, a) / dot1(phi, b);
    double step = 1.0;
    for (int bt = 0; bt < 10; ++bt, step *= 0.5) {
      for (int j = 0; j < n; ++j) cand[j] = phi[j] + step * (a[j] - dl * b[j]);
      double m = dot1(cand, cand);
      if (!(m > 0)) continue;
      double s = std::sqrt(prm.mu / m);
      for (double& x : cand) x *= s;
      residual(cand, ell + step * dl, F);
      double rc = std::sqrt(dot1(F, F) / prm.mu);
      if (rc < res) {
        phi.swap(cand);
        ell += step * dl;
        break;
      }
    }
  }

  Field u(g);
  for (int i = 0; i < gr.nr; ++i)
    for (int j = 0; j < n; ++j) u.at(i, j) = tg.values[i] * phi[j];
  zero_dirichlet_rows(u);
  renormalize_mass(u, prm.mu);
  return u;
}

// --------------------------------------------------------------------------
// Ground-state solve

/// Mass-projected gradient flow with backtracking, then a bordered Newton
/// polish.  The flow aborting out of the Pohozaev set is a hard error
/// (mass too close to the threshold, or an unusable grid).
inline SolveResult solve_ground(const ProblemParams& prm, const GridPtr& g,
                                Field init, const SolverOptions& opts = {}) {
  prm.validate();
  require(init.grid.get() == g.get(), "solve_ground: init grid mismatch");
  SeparableSolver sep(g);
  TransverseGround tg = transverse_ground(*g);
  const double floor = tg.alpha0 + sep.beta0();

  renormalize_mass(init, prm.mu);
  {
    EnergyReport r0 = evaluate(init, prm);
    require(r0.g_indicator > 0,
            "solve_ground: init must lie inside the Pohozaev set");
  }

  SolverOptions o = opts;
  Field u = std::move(init);
  bool polished = false;
  double lambda = 0.0;
  double plugback = 0.0;
  int newton_iters = 0;

  auto try_newton = [&](Field& uf, const EnergyReport&) {
    Field cand = uf;
    double lam = 0.0;
    NewtonOutcome nw = bordered_newton(cand, lam, prm, sep, floor, o);
    if (nw.ok) {
      uf.v.swap(cand.v);
      lambda = lam;
      plugback = nw.plugback;
      newton_iters = nw.iterations;
      polished = true;
      return true;
    }
    return false;
  };

  FlowOutcome flow = projected_flow(u, prm, o.precondition_flow ? &sep : nullptr,
                                    floor, o, o.flow_tol, try_newton);
  if (flow.aborted)
    throw std::runtime_error("solve_ground: " + flow.note +
                             " (mass may be too close to the threshold)");

  if (!polished && flow.reached_tol) {
    // flow converged on its own; still try one polish for the certificate
    try_newton(u, evaluate(u, prm));
  }

  SolveResult res;
  res.kind = SolveKind::ground;
  res.params = prm;
  res.flow_tol_used = o.flow_tol;
  res.newton_tol_used = o.newton_tol;
  res.iterations = flow.iterations + newton_iters;
  renormalize_mass(u, prm.mu);
  res.report = evaluate(u, prm);
  if (!polished) lambda = res.report.multiplier;
  res.multiplier = lambda;
  {
    Field F = apply_H(u, lambda, prm.tau, prm.p);
    res.grad_residual = norm_l2(F) / std::sqrt(prm.mu);
  }
  res.plugback = polished ? plugback : res.grad_residual;
  res.polished = polished;
  res.converged = polished || flow.reached_tol;
  if (!res.converged) res.note = flow.note.empty() ? "not converged" : flow.note;
  const double level = 0.5 * (o.level_ref > 0 ? o.level_ref : 2.0) * prm.mu;
  if (res.report.energy >= level)
    res.note += (res.note.empty() ? "" : "; ") + std::string("energy above the separating level");
  if (res.report.g_indicator <= 0)
    res.note += (res.note.empty() ? "" : "; ") + std::string("outside the Pohozaev set");
  res.field = std::move(u);
  return res;
}

// --------------------------------------------------------------------------
// Level estimate under grid refinement

struct CMuEstimate {
  double value = 0;
  double error_bar = 0;
  std::vector<double> energies;  // per grid, coarse to fine
  std::vector<double> spacings;  // max(hr, hz) per grid
  bool monotone = true;
};

/// Richardson extrapolation (second order in the spacing) of the ground
/// level over a refinement ladder.
inline CMuEstimate c_mu_estimate(const ProblemParams& prm,
                                 const std::vector<GridPtr>& grids,
                                 const SolverOptions& opts = {}) {
  require(grids.size() >= 3, "c_mu_estimate: need at least three grids");
  CMuEstimate est;
  for (const auto& g : grids) {
    SolveResult r = solve_ground(prm, g, reduced_ground_guess(prm, g), opts);
    est.energies.push_back(r.report.energy);
    est.spacings.push_back(std::max(g->hr, g->hz));
  }
  for (std::size_t k = 0; k + 1 < est.energies.size(); ++k) {
    require(est.spacings[k] > est.spacings[k + 1],
            "c_mu_estimate: grids must refine");
    if ((est.energies[k] - est.energies[k + 1]) *
            (est.energies[0] - est.energies[1]) <= 0.0)
      est.monotone = false;
  }
  const std::size_t n = est.energies.size();
  double rho = est.spacings[n - 2] / est.spacings[n - 1];
  double corr = (est.energies[n - 1] - est.energies[n - 2]) / (rho * rho - 1.0);
  est.value = est.energies[n - 1] + corr;
  est.error_bar = std::abs(corr);
  return est;
}

}  // namespace nlspc
