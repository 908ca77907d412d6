#pragma once

#include "nlspc/ground.hpp"
#include "nlspc/soliton.hpp"

namespace nlspc {

struct MPassConfig {
  int n_nodes = 17;
  std::vector<double> tau_schedule{0.9, 0.95, 0.99, 1.0};
  double deflation_distance = -1.0;  // < 0: defaults to 1e-3 sqrt(mu)
  double newton_tol = 1e-11;
  double flow_tol = 1e-8;
  int path_iters = 200;

  void validate() const {
    require(!tau_schedule.empty() && tau_schedule.back() == 1.0,
            "MPassConfig: tau schedule must end at 1");
    for (double t : tau_schedule)
      require(t >= 0.5 && t <= 1.0, "MPassConfig: tau schedule must lie in [1/2,1]");
  }
  double deflation(double mu) const {
    return deflation_distance > 0 ? deflation_distance : 1e-3 * std::sqrt(mu);
  }
};

struct Path {
  std::vector<Field> nodes;
  std::vector<double> node_energies;
  int max_index = 0;

  double max_energy() const { return node_energies[max_index]; }
  void refresh_energies(const ProblemParams& prm) {
    node_energies.resize(nodes.size());
    max_index = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      node_energies[k] = evaluate(nodes[k], prm).energy;
      if (node_energies[k] > node_energies[max_index]) max_index = int(k);
    }
  }
};

// --------------------------------------------------------------------------
// Endpoints and the dilation path

struct Endpoints {
  Field w0;
  Field w1;
  double t1 = 1.0;  // dilation parameter carrying w0 to w1
};

/// w0 inside the Pohozaev set below the separating level, w1 = a 3-D
/// dilation of it with negative indicator and negative energy.  On domains
/// too short for the separated Gaussian family the axial-reduction profile
/// takes over as w0; it satisfies the same level bounds on any truncation.
inline Endpoints make_endpoints(const ProblemParams& prm, const GridPtr& g,
                                double level_ref = 0.0) {
  Field w0;
  try {
    w0 = initial_ground_guess(prm, g, level_ref);
  } catch (const std::runtime_error&) {
    w0 = reduced_ground_guess(prm, g);
    EnergyReport rep = evaluate(w0, prm);
    double target = 0.5 * (level_ref > 0 ? level_ref : 2.0) * prm.mu;
    require(rep.g_indicator > 0 && rep.energy < target,
            "make_endpoints: no admissible starting point on this domain");
  }
  double t = 1.0;
  for (int k = 0; k < 200; ++k) {
    t *= 1.12;
    ScaleStats st;
    Field w1 = dilate3(w0, t, &st);
    if (st.under_resolved)
      throw std::runtime_error(
          "make_endpoints: dilation under-resolved before leaving the set (t=" +
          std::to_string(t) + ")");
    renormalize_mass(w1, prm.mu);
    EnergyReport rep = evaluate(w1, prm);
    if (rep.g_indicator < 0 && rep.energy < 0)
      return {std::move(w0), std::move(w1), t};
  }
  throw std::runtime_error("make_endpoints: no admissible dilation found");
}

/// Nodes t^{3/2} w0(t x) at geometrically spaced t, renormalized to the
/// mass sphere.
inline Path dilation_path(const Field& w0, double t0, double t1, int n_nodes,
                          const ProblemParams& prm) {
  require(n_nodes >= 2, "dilation_path: need at least two nodes");
  Path path;
  for (int k = 0; k < n_nodes; ++k) {
    double s = n_nodes == 1 ? 0.0 : double(k) / (n_nodes - 1);
    double t = t0 * std::pow(t1 / t0, s);
    Field node = dilate3(w0, t);
    renormalize_mass(node, prm.mu);
    path.nodes.push_back(std::move(node));
  }
  path.refresh_energies(prm);
  return path;
}

namespace detail {

/// redistribute nodes to equal stations of the normalized mixed
/// energy/arclength coordinate (string-method reparametrization)
inline void respace_path(Path& path, const ProblemParams& prm) {
  const std::size_t n = path.nodes.size();
  if (n < 3) return;
  std::vector<double> s(n, 0.0);
  double ltot = 0.0, etot = 0.0;
  std::vector<double> dl(n - 1), de(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    Field diff(path.nodes[k].grid);
    for (std::size_t q = 0; q < diff.v.size(); ++q)
      diff.v[q] = path.nodes[k + 1].v[q] - path.nodes[k].v[q];
    dl[k] = norm_l2(diff);
    de[k] = std::abs(path.node_energies[k + 1] - path.node_energies[k]);
    ltot += dl[k];
    etot += de[k];
  }
  if (ltot <= 0) return;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    double a = dl[k] / ltot;
    double b = etot > 0 ? de[k] / etot : 0.0;
    s[k + 1] = s[k] + std::sqrt(a * a + b * b);
  }
  double stot = s[n - 1];
  if (stot <= 0) return;
  std::vector<Field> fresh;
  fresh.push_back(path.nodes.front());
  for (std::size_t k = 1; k + 1 < n; ++k) {
    double target = stot * double(k) / (n - 1);
    std::size_t seg = 0;
    while (seg + 2 < n && s[seg + 1] < target) ++seg;
    double w = (target - s[seg]) / (s[seg + 1] - s[seg]);
    Field node(path.nodes[seg].grid);
    for (std::size_t q = 0; q < node.v.size(); ++q)
      node.v[q] = (1.0 - w) * path.nodes[seg].v[q] + w * path.nodes[seg + 1].v[q];
    renormalize_mass(node, prm.mu);
    fresh.push_back(std::move(node));
  }
  fresh.push_back(path.nodes.back());
  path.nodes = std::move(fresh);
  path.refresh_energies(prm);
}

}  // namespace detail

/// String-method descent: interior nodes move along the negative projected
/// gradient, endpoints stay, nodes are re-projected to the mass sphere and
/// periodically re-spaced.  The path maximum never increases.
inline Path optimize_path(Path path, const ProblemParams& prm, int iters,
                          const SeparableSolver* prec = nullptr,
                          double spectral_floor = 2.0) {
  if (path.nodes.size() < 3 || iters <= 0) return path;
  const std::size_t n = path.nodes.size();
  const GridPtr g = path.nodes.front().grid;
  double dt = prec ? 0.25 : 1e-2;
  double best = path.max_energy();
  int stall = 0;

  Field grad(g), dir(g);
  std::vector<Field> trial(n, Field(g));
  for (int it = 0; it < iters; ++it) {
    bool accepted = false;
    for (int bt = 0; bt < 30 && !accepted; ++bt) {
      trial[0] = path.nodes[0];
      trial[n - 1] = path.nodes[n - 1];
      for (std::size_t k = 1; k + 1 < n; ++k) {
        const Field& node = path.nodes[k];
        double lam = best_multiplier(node, prm);
        apply_H(node, lam, prm.tau, prm.p, grad);
        if (prec) {
          prec->solve(detail::precond_shift(lam, spectral_floor), grad.v, dir.v);
        } else {
          dir.v = grad.v;
        }
        Field& t = trial[k];
        for (std::size_t q = 0; q < t.v.size(); ++q)
          t.v[q] = node.v[q] - dt * dir.v[q];
        zero_dirichlet_rows(t);
        renormalize_mass(t, prm.mu);
      }
      Path cand;
      cand.nodes = trial;
      cand.refresh_energies(prm);
      if ((it + 1) % 10 == 0) detail::respace_path(cand, prm);
      if (cand.max_energy() <= path.max_energy() + 1e-13 * std::abs(path.max_energy())) {
        path = std::move(cand);
        dt = std::min(dt * 1.1, prec ? 2.0 : 1.0);
        accepted = true;
      } else {
        dt *= 0.5;
      }
    }
    if (!accepted) break;
    if (best - path.max_energy() < 1e-12 * std::abs(best)) {
      if (++stall >= 50) break;  // stagnation
    } else {
      stall = 0;
      best = path.max_energy();
    }
  }
  return path;
}

// --------------------------------------------------------------------------
// Mountain-pass solve

/// Soliton-family seed of mass mu for the tau-weighted problem: the
/// tau = 1 family at effective mass tau^{2/(p-1)} mu, amplitude-corrected.
inline Field soliton_seed(const ProblemParams& prm, const SolitonProfile& prof,
                          const GridPtr& g, double tau) {
  double m_eff = std::pow(tau, 2.0 / (prm.p - 1.0)) * prm.mu;
  double omega = omega_for_mass(m_eff, prof);
  Field seed = u_omega_field(omega, prof, g);
  double amp = std::pow(tau, -1.0 / (prm.p - 1.0));
  for (double& x : seed.v) x *= amp;
  return seed;
}

/// Seeded bordered Newton for the excited state, continued along the tau
/// schedule when the direct solve at tau = 1 does not converge.  Rejection
/// conditions follow the level structure: the candidate must sit inside the
/// Pohozaev set strictly above the separating level, away from the ground
/// state.
inline SolveResult solve_mountain_pass(const ProblemParams& prm, const GridPtr& g,
                                       const MPassConfig& cfg,
                                       const SolitonProfile& prof,
                                       const SolveResult* u1 = nullptr,
                                       double level_ref = 0.0) {
  prm.validate();
  cfg.validate();
  SeparableSolver sep(g);
  TransverseGround tg = transverse_ground(*g);
  const double floor = tg.alpha0 + sep.beta0();

  SolverOptions o;
  o.newton_tol = cfg.newton_tol;
  o.flow_tol = cfg.flow_tol;

  auto newton_at = [&](Field& u, double& lam, double tau) {
    ProblemParams pt = prm;
    pt.tau = tau;
    return bordered_newton(u, lam, pt, sep, floor, o);
  };

  Field u = soliton_seed(prm, prof, g, 1.0);
  renormalize_mass(u, prm.mu);
  double lambda = 0.0;
  NewtonOutcome nw = newton_at(u, lambda, 1.0);
  int total_iters = nw.iterations;
  std::string note;

  if (!nw.ok) {
    // monotonicity-trick continuation: walk the schedule, bisecting any
    // tau step on which Newton loses the branch
    note = "tau continuation engaged";
    u = soliton_seed(prm, prof, g, cfg.tau_schedule.front());
    renormalize_mass(u, prm.mu);
    double tau_prev = -1.0;
    Field u_prev = u;
    std::vector<double> stack(cfg.tau_schedule.rbegin(), cfg.tau_schedule.rend());
    int guard = 0;
    while (!stack.empty() && guard++ < 64) {
      double tau = stack.back();
      Field cand = u;
      double lam = lambda;
      NewtonOutcome step = newton_at(cand, lam, tau);
      total_iters += step.iterations;
      if (step.ok) {
        stack.pop_back();
        tau_prev = tau;
        u_prev = cand;
        u = std::move(cand);
        lambda = lam;
        nw = step;
      } else if (tau_prev > 0 && tau - tau_prev > 1e-4) {
        stack.push_back(0.5 * (tau_prev + tau));  // bisect the tau step
        u = u_prev;
      } else {
        note += "; continuation failed at tau=" + std::to_string(tau);
        nw = step;
        break;
      }
    }
  }

  SolveResult res;
  res.kind = SolveKind::mountain_pass;
  res.params = prm;
  res.flow_tol_used = cfg.flow_tol;
  res.newton_tol_used = cfg.newton_tol;
  res.iterations = total_iters;
  renormalize_mass(u, prm.mu);
  res.report = evaluate(u, prm);
  res.multiplier = nw.ok ? lambda : res.report.multiplier;
  {
    Field F = apply_H(u, res.multiplier, prm.tau, prm.p);
    res.plugback = norm_l2(F) / std::sqrt(prm.mu);
  }
  res.grad_residual = res.plugback;
  res.polished = nw.ok;
  res.converged = nw.ok && res.plugback <= cfg.newton_tol * 10;

  const double level = 0.5 * (level_ref > 0 ? level_ref : 2.0) * prm.mu;
  if (res.report.energy <= level) {
    res.converged = false;
    note += (note.empty() ? "" : "; ") +
            std::string("rejected: collapsed onto the ground branch");
  }
  if (res.report.g_indicator <= 0) {
    res.converged = false;
    note += (note.empty() ? "" : "; ") + std::string("outside the Pohozaev set");
  }
  if (u1 != nullptr) {
    Field u1_here = resample_to(u1->field, g);
    double cross = inner(u1_here, u);
    double d2 = u1->report.mass + res.report.mass - 2.0 * cross;
    double dist = std::sqrt(std::max(0.0, d2));
    if (dist < cfg.deflation(prm.mu)) {
      res.converged = false;
      note += (note.empty() ? "" : "; ") +
              std::string("rejected: within deflation distance of the ground state");
    }
  }
  res.note = note;
  res.field = std::move(u);
  return res;
}

// --------------------------------------------------------------------------
// Distinctness report

struct DistinctnessReport {
  double l2_distance = 0;
  double h_distance = 0;
  double e1 = 0, e2 = 0;
  double lambda1 = 0, lambda2 = 0;
  double level1 = 0, level2 = 0;   // (Lambda mu / 2) with each grid's Lambda
  double lambda_domain1 = 0, lambda_domain2 = 0;
  bool ordering_ok = false;        // E(u1) < level < E(u2)
  bool multipliers_ok = false;     // lambda_i > -Lambda_domain_i
  bool distance_ok = false;
};

inline DistinctnessReport distinctness_check(const SolveResult& u1,
                                             const SolveResult& u2,
                                             double deflation_distance) {
  DistinctnessReport rep;
  rep.e1 = u1.report.energy;
  rep.e2 = u2.report.energy;
  rep.lambda1 = u1.multiplier;
  rep.lambda2 = u2.multiplier;
  rep.lambda_domain1 =
      u1.lambda_domain > 0 ? u1.lambda_domain
                           : first_eigenpair(u1.field.grid).eigenvalue;
  rep.lambda_domain2 =
      u2.lambda_domain > 0 ? u2.lambda_domain
                           : (u2.field.grid.get() == u1.field.grid.get()
                                  ? rep.lambda_domain1
                                  : first_eigenpair(u2.field.grid).eigenvalue);
  rep.level1 = 0.5 * rep.lambda_domain1 * u1.params.mu;
  rep.level2 = 0.5 * rep.lambda_domain2 * u2.params.mu;

  // cross terms on the finer grid (the concentrated candidate's home)
  const bool u2_finer = u2.field.grid->hr <= u1.field.grid->hr;
  const Field& fine = u2_finer ? u2.field : u1.field;
  const Field& coarse = u2_finer ? u1.field : u2.field;
  Field moved = resample_to(coarse, fine.grid);
  double cross_l2 = inner(moved, fine);
  double d2 = u1.report.mass + u2.report.mass - 2.0 * cross_l2;
  rep.l2_distance = std::sqrt(std::max(0.0, d2));

  auto h2 = [](const Field& f) { return sq(h_norm(f)); };
  const CylGrid& gf = *fine.grid;
  double cross_h = kinetic_form(gf, moved.v, fine.v);
  cross_h += sum_terms(gf.size(), [&](std::size_t k) {
    std::size_t i = k / gf.nz;
    return gf.w[k] * (gf.pot(int(i)) + 1.0) * moved.v[k] * fine.v[k];
  });
  rep.h_distance = std::sqrt(std::max(0.0, h2(u1.field) + h2(u2.field) - 2.0 * cross_h));

  rep.ordering_ok = rep.e1 < rep.level1 && rep.e2 > rep.level2;
  rep.multipliers_ok =
      rep.lambda1 > -rep.lambda_domain1 && rep.lambda2 > -rep.lambda_domain2;
  rep.distance_ok = rep.l2_distance >= deflation_distance;
  return rep;
}

}  // namespace nlspc
