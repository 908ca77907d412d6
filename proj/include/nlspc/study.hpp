#pragma once

#include <cmath>

#include "nlspc/mpass.hpp"

namespace nlspc {

// --------------------------------------------------------------------------
// Grid sizing for the two branches

/// Frequency of the axial reduction at mass mu (sech ansatz, closed form).
inline double axial_frequency_estimate(double p, double mu) {
  double kappa = 2.0 * std::pow(kPi, 0.5 * (1.0 - p)) / (p + 1.0);
  double Sp = 2.0 * adaptive_simpson(
                        [&](double x) { return std::pow(1.0 / std::cosh(x), 4.0 / (p - 1.0)); },
                        0.0, 60.0, 1e-12);
  double expo = 2.0 / (p - 1.0) - 0.5;
  return std::pow(
      mu * (p - 1.0) / (2.0 * Sp) * std::pow(2.0 * kappa / (p + 1.0), 2.0 / (p - 1.0)),
      1.0 / expo);
}

/// Ground branch: fixed transverse box, axial extent scaled to the soliton
/// width of the reduced problem.
inline GridPtr ground_grid(double p, double mu, int quality = 1) {
  double omega = axial_frequency_estimate(p, mu);
  double width = 1.0 / std::sqrt(omega);
  double z_max = std::max(12.0, 8.0 * width);
  int nr = quality >= 2 ? 224 : 144;
  int nz = quality >= 2 ? 384 : 256;
  // keep at least ~25 nodes across the axial core
  while ((nz - 1) * width / z_max < 25.0 && nz < 1024) nz *= 2;
  return build_grid(nr, nz, 9.0, z_max);
}

/// Excited branch: cube scaled to the concentration length 1/sqrt(omega_mu),
/// proportional to the rescaling map so the rescaled frame is mu-independent.
inline GridPtr mpass_grid(double p, double mu, const SolitonProfile& prof,
                          int quality = 1) {
  (void)p;
  double omega = omega_for_mass(mu, prof);
  double ext = 24.0 / std::sqrt(omega);
  int n = quality >= 2 ? 384 : 320;
  return build_grid(n, n, ext, ext);
}

// --------------------------------------------------------------------------
// Sweep records

struct GridInfo {
  int nr = 0, nz = 0;
  double r_max = 0, z_max = 0, hr = 0, hz = 0;
};
inline GridInfo grid_info(const CylGrid& g) {
  return {g.nr, g.nz, g.r_max, g.z_max, g.hr, g.hz};
}

struct SweepRecord {
  std::string kind;          // "domain" or "mu"
  double control = 0;        // extent or mass
  double lambda_domain = 0;  // measured first eigenvalue
  double c_level = 0;
  double m_level = 0;
  double lambda1 = 0;
  double lambda2 = 0;
  double pohozaev1 = 0, pohozaev2 = 0;  // relative to kinetic
  double h_ratio = 0;            // ||u1 - psi phi||_H / sqrt(mu)
  double rescaled_distance = 0;  // ||T_mu u2 - u_omega1||_L2
  double plugback1 = 0, plugback2 = 0;
  bool separated = false;  // c < Lambda mu/2 < m with the grid's Lambda
  GridInfo ground_grid, mpass_grid;
};

// --------------------------------------------------------------------------
// Domain sweep (truncation limits)

struct DomainSweepResult {
  std::vector<SweepRecord> records;
  std::vector<std::string> failures;
  double c_extrapolated = 0;       // Aitken limit of the c sequence
  double c_extrapolated_prev = 0;  // same, dropping the largest extent
  double lambda_extrapolated = 0;  // 1/R^2 fit
  bool ok() const { return failures.empty(); }
};

/// Solves both branches on a family of truncated cylinders at fixed spacing
/// and verifies the truncation-limit structure: the first eigenvalue and the
/// ground level decrease strictly, the excited level does not increase.
inline DomainSweepResult domain_sweep(const ProblemParams& prm,
                                      std::span<const double> extents, double h,
                                      const SolitonProfile& prof,
                                      const SolverOptions& base_opts = {},
                                      int threads = 1) {
  require(extents.size() >= 3, "domain_sweep: need at least three extents");
  DomainSweepResult out;
  const int npts = int(extents.size());
  out.records.resize(npts);
  std::vector<std::string> fail(npts);

  parallel_for(npts, threads, [&](int idx) {
    double R = extents[idx];
    int n = int(std::lround(R / h)) + 1;
    auto g = build_grid(n, n, (n - 1) * h, (n - 1) * h);
    EigenResult eig = first_eigenpair(g);

    SolverOptions o = base_opts;
    o.level_ref = eig.eigenvalue;
    SweepRecord rec;
    rec.kind = "domain";
    rec.control = (n - 1) * h;
    rec.lambda_domain = eig.eigenvalue;
    rec.ground_grid = rec.mpass_grid = grid_info(*g);

    SolveResult u1 = solve_ground(prm, g, reduced_ground_guess(prm, g), o);
    u1.lambda_domain = eig.eigenvalue;
    MPassConfig cfg;
    SolveResult u2 = solve_mountain_pass(prm, g, cfg, prof, &u1, eig.eigenvalue);
    if (!u1.converged)
      fail[idx] += "ground not converged at extent " + std::to_string(R) + "; ";
    if (!u2.converged)
      fail[idx] += "mountain pass not converged at extent " + std::to_string(R) +
                   " (" + u2.note + "); ";

    rec.c_level = u1.report.energy;
    rec.m_level = u2.report.energy;
    rec.lambda1 = u1.multiplier;
    rec.lambda2 = u2.multiplier;
    rec.pohozaev1 = std::abs(u1.report.pohozaev_residual) / u1.report.kinetic;
    rec.pohozaev2 = std::abs(u2.report.pohozaev_residual) / u2.report.kinetic;
    rec.plugback1 = u1.plugback;
    rec.plugback2 = u2.plugback;
    double half = 0.5 * eig.eigenvalue * prm.mu;
    rec.separated = rec.c_level < half && half < rec.m_level;
    if (!rec.separated)
      fail[idx] += "level separation failed at extent " + std::to_string(R) + "; ";
    out.records[idx] = std::move(rec);
  });
  for (auto& f : fail)
    if (!f.empty()) out.failures.push_back(f);
  std::vector<double> exts, lams;
  for (const auto& r : out.records) {
    exts.push_back(r.control);
    lams.push_back(r.lambda_domain);
  }

  for (std::size_t k = 0; k + 1 < out.records.size(); ++k) {
    if (!(out.records[k].lambda_domain > out.records[k + 1].lambda_domain + 1e-12))
      out.failures.push_back("Lambda not strictly decreasing");
    if (!(out.records[k].c_level > out.records[k + 1].c_level + 1e-12))
      out.failures.push_back("c level not strictly decreasing");
    if (out.records[k + 1].m_level > out.records[k].m_level + 1e-8)
      out.failures.push_back("m level increased beyond tolerance");
  }

  auto aitken = [](double a, double b, double c) {
    double d = (a - b) - (b - c);
    return std::abs(d) > 1e-300 ? c - sq(b - c) / d : c;
  };
  const auto& R = out.records;
  if (R.size() >= 3) {
    out.c_extrapolated =
        aitken(R[R.size() - 3].c_level, R[R.size() - 2].c_level, R.back().c_level);
    out.c_extrapolated_prev =
        R.size() >= 4 ? aitken(R[R.size() - 4].c_level, R[R.size() - 3].c_level,
                               R[R.size() - 2].c_level)
                      : out.c_extrapolated;
  }
  out.lambda_extrapolated = extrapolate_lambda(exts, lams);
  return out;
}

// --------------------------------------------------------------------------
// Mass sweep (asymptotics)

struct MuSweepResult {
  std::vector<SweepRecord> records;
  std::vector<std::string> failures;
  double lambda2_slope = 0;       // log-log slope of lambda2 vs mu
  double omega1 = 0;
  double lambda2_scaled_last = 0; // lambda2 * mu^{(2p-2)/(3p-7)} at smallest mu
  bool ok() const { return failures.empty(); }
};

/// Asymptotic sweep over decreasing masses: multiplier bracket on the ground
/// branch, multiplier growth and profile convergence on the excited branch.
inline MuSweepResult mu_sweep(double p, std::span<const double> mus,
                              const SolitonProfile& prof, int quality = 1,
                              const SolverOptions& base_opts = {},
                              int threads = 1) {
  require(mus.size() >= 2, "mu_sweep: need at least two masses");
  MuSweepResult out;
  out.omega1 = omega_for_mass(1.0, prof);
  const Constants cst{.p = p,
                      .lambda0 = 2.0,
                      .gn_constant = gn_constant_from_Q(prof)};
  const double bracket_threshold = lambda1_bracket_threshold(cst, p);

  const int npts = int(mus.size());
  out.records.resize(npts);
  std::vector<std::string> fail(npts);
  parallel_for(npts, threads, [&](int idx) {
    double mu = mus[idx];
    ProblemParams prm(p, mu);
    SweepRecord rec;
    rec.kind = "mu";
    rec.control = mu;

    auto g1 = ground_grid(p, mu, quality);
    EigenResult eig1 = first_eigenpair(g1);
    SolverOptions o = base_opts;
    o.level_ref = eig1.eigenvalue;
    SolveResult u1 = solve_ground(prm, g1, reduced_ground_guess(prm, g1), o);
    u1.lambda_domain = eig1.eigenvalue;
    rec.lambda_domain = eig1.eigenvalue;
    rec.ground_grid = grid_info(*g1);
    rec.c_level = u1.report.energy;
    rec.lambda1 = u1.multiplier;
    rec.pohozaev1 = std::abs(u1.report.pohozaev_residual) / u1.report.kinetic;
    rec.plugback1 = u1.plugback;
    if (!u1.converged)
      fail[idx] += "ground not converged at mu=" + std::to_string(mu) + "; ";

    // multiplier bracket, evaluated with the grid's own spectral floor
    if (mu < bracket_threshold) {
      Constants cg = cst;
      cg.lambda0 = eig1.eigenvalue;
      auto [lo, hi] = lambda1_bracket(cg, p, mu);
      if (!(lo < u1.multiplier && u1.multiplier < hi))
        fail[idx] += "lambda1 outside bracket at mu=" + std::to_string(mu) + "; ";
    }

    // perpendicular component against the grid's transverse ground mode
    {
      TransverseGround tg = transverse_ground(*g1);
      Phi0Projection proj = phi0_projection(u1.field, tg.values);
      rec.h_ratio = proj.reconstruction_error_h / std::sqrt(mu);
    }

    auto g2 = mpass_grid(p, mu, prof, quality);
    MPassConfig cfg;
    SolveResult u2 = solve_mountain_pass(prm, g2, cfg, prof, &u1);
    rec.mpass_grid = grid_info(*g2);
    rec.m_level = u2.report.energy;
    rec.lambda2 = u2.multiplier;
    rec.pohozaev2 = std::abs(u2.report.pohozaev_residual) / u2.report.kinetic;
    rec.plugback2 = u2.plugback;
    if (!u2.converged)
      fail[idx] += "mountain pass not converged at mu=" + std::to_string(mu) +
                   " (" + u2.note + "); ";

    // || T_mu u2 - u_{omega_1} ||_{L^2} computed in the solve frame:
    // equals || u2 - u_{omega_mu} || / sqrt(mu) by the exact family scaling
    {
      Field ref = u_omega_field(omega_for_mass(mu, prof), prof, g2);
      Field diff(g2);
      for (std::size_t k = 0; k < diff.v.size(); ++k)
        diff.v[k] = u2.field.v[k] - ref.v[k];
      rec.rescaled_distance = norm_l2(diff) / std::sqrt(mu);
    }
    double half = 0.5 * rec.lambda_domain * mu;
    rec.separated = rec.c_level < half && half < rec.m_level;
    out.records[idx] = std::move(rec);
  });
  for (auto& f : fail)
    if (!f.empty()) out.failures.push_back(f);

  // trends
  for (std::size_t k = 0; k + 1 < out.records.size(); ++k) {
    if (!(out.records[k + 1].lambda2 > out.records[k].lambda2))
      out.failures.push_back("lambda2 not increasing as mu decreases");
    if (!(out.records[k + 1].h_ratio < out.records[k].h_ratio))
      out.failures.push_back("H-ratio not decreasing");
    if (!(out.records[k + 1].rescaled_distance < out.records[k].rescaled_distance))
      out.failures.push_back("rescaled profile distance not decreasing");
  }
  // log-log slope of lambda2 against mu
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = double(out.records.size());
    for (const auto& r : out.records) {
      double x = std::log(r.control), y = std::log(r.lambda2);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    out.lambda2_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  {
    const auto& last = out.records.back();
    out.lambda2_scaled_last =
        last.lambda2 * std::pow(last.control, (2.0 * p - 2.0) / (3.0 * p - 7.0));
  }
  return out;
}

// --------------------------------------------------------------------------
// Rescaled-frame identity

struct RescaledFrameReport {
  double scale_factor = 0;     // mu^{(5-p)/(3p-7)}
  double energy_rescaled = 0;  // E_mu(T_mu u)
  double energy_expected = 0;  // scale_factor * E(u)
  double rel_error = 0;
  double mass_drift = 0;       // |mass(T_mu u) - 1|
  double omega_transformed = 0;  // mu^{(2p-2)/(3p-7)} lambda
};

inline RescaledFrameReport rescaled_frame_check(const SolveResult& u2, double mu) {
  const double p = u2.params.p;
  RescaledFrameReport rep;
  ScaleStats st;
  Field hat = t_mu_map(u2.field, mu, p, TmuDirection::forward, &st);
  rep.mass_drift = std::abs(mass(hat) - 1.0);
  double conf_w = std::pow(mu, (4.0 * p - 4.0) / (3.0 * p - 7.0));
  double K = kinetic(hat), C = confine_term(hat), P = power_term(hat, p + 1.0);
  rep.energy_rescaled = 0.5 * K + 0.5 * conf_w * C - P / (p + 1.0);
  rep.scale_factor = std::pow(mu, (5.0 - p) / (3.0 * p - 7.0));
  rep.energy_expected = rep.scale_factor * u2.report.energy;
  rep.rel_error = std::abs(rep.energy_rescaled - rep.energy_expected) /
                  std::max(1e-300, std::abs(rep.energy_expected));
  rep.omega_transformed =
      std::pow(mu, (2.0 * p - 2.0) / (3.0 * p - 7.0)) * u2.multiplier;
  return rep;
}

// --------------------------------------------------------------------------
// Liouville weak-form diagnostic

struct LiouvilleRow {
  double R = 0;
  double lhs = 0;         // k^2 * <w, phi_R>          (axial curvature term)
  double w_term = 0;      // boundary flux  ~ sqrt(2 pi / R) w(R)
  double v_term = 0;      // <v, phi_R>
  double shift_term = 0;  // (lambda + alpha0) <w, phi_R>
  double residual_generalized = 0;  // relative, with the shift term
  double residual_pure = 0;         // relative, identity taken at -alpha0
};

struct LiouvilleReport {
  std::vector<LiouvilleRow> rows;
  double shift_growth_rate = 0;  // fitted d log|shift| / d log R
  double max_residual_generalized = 0;
};

/// Tests the discrete equation against the separated family
/// psi(r) * cos(pi z / 2R): the transverse factor is the grid's own ground
/// mode, the axial factor an exact discrete eigenvector below the cut.  For
/// a converged solution the generalized identity closes to the plug-back
/// level; dropping the multiplier-shift term leaves a defect growing like
/// sqrt(R), the mechanism that forbids solutions at the spectral floor.
inline LiouvilleReport liouville_diagnostic(const Field& u, double lambda,
                                            std::span<const double> R_list,
                                            double p) {
  const CylGrid& g = *u.grid;
  LiouvilleReport rep;
  TransverseGround tg = transverse_ground(g);

  std::vector<double> w(g.nz, 0.0), v(g.nz, 0.0);
  for (int j = 0; j < g.nz; ++j) {
    double sw = 0.0, sv = 0.0;
    for (int i = 0; i < g.nr; ++i) {
      sw += g.wr[i] * u.at(i, j) * tg.values[i];
      sv += g.wr[i] * std::pow(std::abs(u.at(i, j)), p - 1.0) * u.at(i, j) *
            tg.values[i];
    }
    w[j] = 2.0 * kPi * sw;
    v[j] = 2.0 * kPi * sv;
  }

  std::vector<double> lR, lS;
  for (double Rreq : R_list) {
    require(Rreq > 0 && Rreq <= g.z_max, "liouville_diagnostic: R beyond grid");
    int J = int(std::lround(Rreq / g.hz));
    J = std::min(std::max(J, 2), g.nz - 2);
    const double R = g.z[J];
    const double k = 0.5 * kPi / R;
    const double khat2 = (2.0 - 2.0 * std::cos(k * g.hz)) / (g.hz * g.hz);
    const double amp = std::sqrt(2.0 * R / kPi);

    std::vector<double> phi(g.nz, 0.0);
    for (int j = 0; j <= J; ++j) phi[j] = amp * std::cos(k * g.z[j]);
    phi[J] = 0.0;  // cos(pi/2) exactly

    double Swphi = 0.0, Svphi = 0.0;
    for (int j = 0; j <= J; ++j) {
      Swphi += 2.0 * g.wz[j] * w[j] * phi[j];
      Svphi += 2.0 * g.wz[j] * v[j] * phi[j];
    }
    const double flux = 2.0 * g.wz[J] * w[J] * phi[J - 1] / (g.hz * g.hz);

    LiouvilleRow row;
    row.R = R;
    row.lhs = khat2 * Swphi;
    row.w_term = flux;
    row.v_term = Svphi;
    row.shift_term = (lambda + tg.alpha0) * Swphi;
    double scale = std::max({std::abs(row.lhs), std::abs(row.w_term),
                             std::abs(row.v_term), std::abs(row.shift_term)});
    if (scale > 0) {
      row.residual_generalized =
          std::abs(row.lhs + row.shift_term - row.w_term - row.v_term) / scale;
      row.residual_pure = std::abs(row.lhs - row.w_term - row.v_term) / scale;
    }
    rep.rows.push_back(row);
    rep.max_residual_generalized =
        std::max(rep.max_residual_generalized, row.residual_generalized);
    if (std::abs(row.shift_term) > 0) {
      lR.push_back(std::log(R));
      lS.push_back(std::log(std::abs(row.shift_term)));
    }
  }
  if (lR.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = double(lR.size());
    for (std::size_t i = 0; i < lR.size(); ++i) {
      sx += lR[i];
      sy += lS[i];
      sxx += lR[i] * lR[i];
      sxy += lR[i] * lS[i];
    }
    rep.shift_growth_rate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return rep;
}

}  // namespace nlspc
