#pragma once

#include <string>

#include "nlspc/functional.hpp"
#include "nlspc/linsolve.hpp"
#include "nlspc/spectral.hpp"

namespace nlspc {

struct SolverOptions {
  double flow_tol = 1e-8;    // projected-gradient target of the flow stage
  double newton_tol = 1e-11; // plug-back target of the Newton polish
  double switch_tol = 1e-3;  // residual below which Newton is attempted
  int max_flow_iters = 30000;
  int max_newton_iters = 50;
  double dt0 = 1e-2;
  bool precondition_flow = true;  // separable solve applied to the descent
  double level_ref = 0.0;         // energy reference; 0 = analytic Lambda0
  int minres_maxit = 500;
  double minres_tol = 1e-3;
};

enum class SolveKind { ground, mountain_pass };

struct SolveResult {
  Field field;
  double multiplier = 0;
  EnergyReport report;
  double grad_residual = 0;  // ||apply_H(u, lambda(u), tau)|| / ||u||
  double plugback = 0;       // same quantity after the final polish
  int iterations = 0;
  SolveKind kind = SolveKind::ground;
  bool converged = false;
  bool polished = false;
  std::string note;
  ProblemParams params{3.0, 1.0, 1.0};
  double lambda_domain = 0;  // measured first eigenvalue of the grid (if set)
  double flow_tol_used = 0, newton_tol_used = 0;
};

/// lambda minimizing ||apply_H(u, lambda, tau)|| over lambda; equals the
/// energy-identity multiplier.
inline double best_multiplier(const Field& u, const ProblemParams& prm) {
  EnergyReport rep = evaluate(u, prm);
  return rep.multiplier;
}

namespace detail {

/// shift that keeps the separable preconditioner positive definite
inline double precond_shift(double lambda, double spectral_floor) {
  double lam = std::max(lambda, -spectral_floor + 0.05);
  return lam + 0.5 + 0.02 * std::abs(lam);
}

}  // namespace detail

struct FlowOutcome {
  double residual = 0;
  int iterations = 0;
  bool reached_tol = false;
  bool aborted = false;       // left the Pohozaev set
  std::string note;
  std::vector<double> energy_trace;
};

/// Mass-projected descent with backtracking on the discrete energy.  The
/// plain variant is u <- normalize(u - dt * apply_H(u, lambda(u), tau));
/// the preconditioned variant applies a separable solve to the gradient.
/// Stops at `tol` on the projected-gradient residual or when `try_newton`
/// (checked under switch_tol) says the polish already succeeded.
template <class TryNewton>
FlowOutcome projected_flow(Field& u, const ProblemParams& prm,
                           const SeparableSolver* prec, double spectral_floor,
                           const SolverOptions& o, double tol,
                           TryNewton&& try_newton, bool enforce_g = true,
                           bool keep_trace = false) {
  FlowOutcome out;
  renormalize_mass(u, prm.mu);
  EnergyReport rep = evaluate(u, prm);
  double dt = o.dt0;
  Field grad(u.grid), dir(u.grid), trial(u.grid);
  const double sqmu = std::sqrt(prm.mu);
  double switch_tol = o.switch_tol;

  for (int it = 0; it < o.max_flow_iters; ++it) {
    apply_H(u, rep.multiplier, prm.tau, prm.p, grad);
    double res = norm_l2(grad) / sqmu;
    out.residual = res;
    out.iterations = it;
    if (res <= tol) {
      out.reached_tol = true;
      return out;
    }
    if (res <= switch_tol && try_newton(u, rep)) {
      out.reached_tol = true;
      return out;
    }
    if (res <= switch_tol) switch_tol *= 0.25;  // polish failed, flow deeper

    if (prec) {
      prec->solve(detail::precond_shift(rep.multiplier, spectral_floor), grad.v,
                  dir.v);
    } else {
      dir.v = grad.v;
    }

    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t k = 0; k < u.v.size(); ++k) {
        double x = u.v[k] - dt * dir.v[k];
        trial.v[k] = x < 0.0 ? 0.0 : x;
      }
      zero_dirichlet_rows(trial);
      renormalize_mass(trial, prm.mu);
      EnergyReport rt = evaluate(trial, prm);
      if (rt.energy <= rep.energy + 1e-14 * std::abs(rep.energy)) {
        u.v.swap(trial.v);
        rep = rt;
        dt = std::min(dt * 1.2, prec ? 4.0 : 1e6);
        accepted = true;
        break;
      }
      dt *= 0.5;
    }
    if (keep_trace) out.energy_trace.push_back(rep.energy);
    if (!accepted) {
      out.note = "flow stalled: no energy-decreasing step";
      return out;
    }
    if (enforce_g && rep.g_indicator <= 0.0) {
      out.aborted = true;
      out.note = "flow left the Pohozaev set (g_indicator <= 0)";
      return out;
    }
  }
  out.note = "flow iteration limit reached";
  return out;
}

struct NewtonOutcome {
  bool ok = false;
  int iterations = 0;
  double plugback = 0;
};

/// Bordered Newton on (u, lambda): apply_H(u, lambda, tau) = 0 subject to
/// mass(u) = mu.  The symmetric indefinite system is solved by MINRES in the
/// weighted metric with a separable diagonal-block preconditioner.
inline NewtonOutcome bordered_newton(Field& u, double& lambda,
                                     const ProblemParams& prm,
                                     const SeparableSolver& sep,
                                     double spectral_floor,
                                     const SolverOptions& o) {
  const CylGrid& g = *u.grid;
  const std::size_t n = g.size();
  NewtonOutcome out;

  renormalize_mass(u, prm.mu);
  lambda = best_multiplier(u, prm);

  std::vector<double> wext(n + 1, 1.0);
  std::copy(g.w.begin(), g.w.end(), wext.begin());

  Field F(u.grid), tmp(u.grid), xbuf(u.grid);
  std::vector<double> nlcoef(n), rhs(n + 1), sol(n + 1);
  Field cand(u.grid);

  apply_H(u, lambda, prm.tau, prm.p, F);
  double res = norm_l2(F) / std::sqrt(prm.mu);

  for (int it = 0; it < o.max_newton_iters; ++it) {
    out.iterations = it;
    out.plugback = res;
    if (res <= o.newton_tol) {
      out.ok = true;
      return out;
    }

    for (std::size_t k = 0; k < n; ++k)
      nlcoef[k] = prm.tau * prm.p * std::pow(std::abs(u.v[k]), prm.p - 1.0);
    for (int j = 0; j < g.nz; ++j) nlcoef[g.idx(g.nr - 1, j)] = 0.0;
    for (int i = 0; i < g.nr; ++i) nlcoef[g.idx(i, g.nz - 1)] = 0.0;

    auto Aapply = [&](std::span<const double> x, std::span<double> y) {
      std::copy(x.begin(), x.begin() + n, xbuf.v.begin());
      apply_H(xbuf, lambda, 0.0, prm.p, tmp);
      for (std::size_t k = 0; k < n; ++k)
        y[k] = tmp.v[k] - nlcoef[k] * xbuf.v[k] + u.v[k] * x[n];
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += g.w[k] * u.v[k] * x[k];
      y[n] = s;
    };
    double sigma = detail::precond_shift(lambda, spectral_floor);
    auto Msolve = [&](std::span<const double> r, std::span<double> z) {
      sep.solve(sigma, r.first(n), z.first(n));
      z[n] = r[n] / prm.mu;
    };

    for (std::size_t k = 0; k < n; ++k) rhs[k] = -F.v[k];
    rhs[n] = 0.0;
    minres(n + 1, Aapply, Msolve, wext, rhs, std::span<double>(sol), o.minres_tol,
           o.minres_maxit);

    bool accepted = false;
    double step = 1.0;
    for (int bt = 0; bt < 8; ++bt, step *= 0.5) {
      for (std::size_t k = 0; k < n; ++k) cand.v[k] = u.v[k] + step * sol[k];
      zero_dirichlet_rows(cand);
      double m = mass(cand);
      if (!(m > 0)) continue;
      renormalize_mass(cand, prm.mu);
      ProblemParams pc = prm;
      double lc = best_multiplier(cand, pc);
      apply_H(cand, lc, prm.tau, prm.p, F);
      double rc = norm_l2(F) / std::sqrt(prm.mu);
      if (rc <= (1.0 - 0.2 * step) * res || rc <= o.newton_tol) {
        u.v.swap(cand.v);
        lambda = lc;
        res = rc;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      apply_H(u, lambda, prm.tau, prm.p, F);  // restore F for caller
      out.plugback = res;
      return out;  // diverged; caller decides what to do
    }
  }
  out.plugback = res;
  out.ok = res <= o.newton_tol;
  return out;
}

}  // namespace nlspc
