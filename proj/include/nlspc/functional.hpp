#pragma once

#include <optional>

#include "nlspc/grid.hpp"

namespace nlspc {

struct ProblemParams {
  double p = 3.0;    // nonlinearity exponent, 7/3 < p < 5
  double mu = 1.0;   // target mass (squared L2 norm)
  double tau = 1.0;  // nonlinearity weight, [1/2, 1]

  ProblemParams() = default;
  ProblemParams(double p_, double mu_, double tau_ = 1.0)
      : p(p_), mu(mu_), tau(tau_) {
    validate();
  }
  void validate() const {
    require(p > 7.0 / 3.0 && p < 5.0, "ProblemParams: need 7/3 < p < 5");
    require(finite(mu) && mu > 0, "ProblemParams: need mu > 0");
    require(tau >= 0.5 && tau <= 1.0, "ProblemParams: need tau in [1/2,1]");
  }
};

/// All scalar functionals of one field, assembled from a single sweep.
struct EnergyReport {
  double mass = 0;
  double kinetic = 0;     // int |grad u|^2
  double confine = 0;     // int V |u|^2
  double nonlin = 0;      // int |u|^{p+1}
  double energy = 0;      // kinetic/2 + confine/2 - tau*nonlin/(p+1)
  double pohozaev_residual = 0;  // kinetic - confine - (3p-3)/(2p+2)*tau*nonlin
  double g_indicator = 0;        // kinetic - (3p-3)/(2p+2)*nonlin
  double multiplier = 0;         // (tau*nonlin - kinetic - confine)/mass
  double tau = 1.0;
  bool degenerate = false;       // mass == 0
};

inline EnergyReport evaluate(const Field& u, const ProblemParams& prm) {
  EnergyReport rep;
  rep.tau = prm.tau;
  rep.mass = mass(u);
  rep.kinetic = kinetic(u);
  rep.confine = confine_term(u);
  rep.nonlin = power_term(u, prm.p + 1.0);
  double gn = (3.0 * prm.p - 3.0) / (2.0 * prm.p + 2.0);
  rep.energy = 0.5 * rep.kinetic + 0.5 * rep.confine -
               prm.tau * rep.nonlin / (prm.p + 1.0);
  rep.pohozaev_residual = rep.kinetic - rep.confine - gn * prm.tau * rep.nonlin;
  rep.g_indicator = rep.kinetic - gn * rep.nonlin;
  if (rep.mass > 0) {
    rep.multiplier = (prm.tau * rep.nonlin - rep.kinetic - rep.confine) / rep.mass;
  } else {
    rep.degenerate = true;
  }
  return rep;
}

enum class GClass { interior, boundary, exterior };

/// Membership in the Pohozaev set, with a +-1e-8*kinetic band around the
/// boundary tie.
inline GClass g_classify(const EnergyReport& rep) {
  double band = 1e-8 * std::abs(rep.kinetic);
  if (rep.g_indicator > band) return GClass::interior;
  if (rep.g_indicator < -band) return GClass::exterior;
  return GClass::boundary;
}

/// nonlin / (kinetic^{(3p-3)/4} mass^{(5-p)/4}); bounded by the best
/// Gagliardo-Nirenberg constant.
inline double gn_quotient(const Field& u, double p) {
  double m = mass(u);
  require(m > 0, "gn_quotient: zero field");
  double k = kinetic(u);
  double nl = power_term(u, p + 1.0);
  return nl / (std::pow(k, (3.0 * p - 3.0) / 4.0) * std::pow(m, (5.0 - p) / 4.0));
}

// --------------------------------------------------------------------------
// Closed-form constants

struct Constants {
  double p = 3.0;
  double lambda0 = 2.0;      // bottom of spec(-Lap + V); equals 2
  double lambda0_measured = 0;  // extrapolated grid eigenvalue, if available
  double gn_constant = 0;    // best GN constant C_{p+1}
  double mu1 = 0;            // mass threshold
  double omega1 = 0;         // frequency of the mass-1 free soliton
  double nu_coeff = 0;       // nu_mu >= nu_coeff * mu^nu_exponent
  double nu_exponent = 0;
  // provenance
  double shoot_tol = 0;
  double q0 = 0;             // soliton central value
  double mass_Q = 0;         // soliton squared L2 norm
};

/// mu1 = (3p-7)^{(3p-7)/(2p-2)} (2p+2)^{2/(p-1)}
///       / [ (3p-3)^{3/2} C^{2/(p-1)} Lambda0^{(2p-2)/(3p-7)} ].
inline double mu1_threshold(double gn_constant, double lambda0, double p) {
  require(p > 7.0 / 3.0 && p < 5.0, "mu1_threshold: need 7/3 < p < 5");
  require(gn_constant > 0 && lambda0 > 0, "mu1_threshold: constants must be positive");
  double a = std::pow(3.0 * p - 7.0, (3.0 * p - 7.0) / (2.0 * p - 2.0));
  double b = std::pow(2.0 * p + 2.0, 2.0 / (p - 1.0));
  double c = std::pow(3.0 * p - 3.0, 1.5);
  double d = std::pow(gn_constant, 2.0 / (p - 1.0));
  double e = std::pow(lambda0, (2.0 * p - 2.0) / (3.0 * p - 7.0));
  return a * b / (c * d * e);
}
inline double mu1_threshold(const Constants& cst, double p) {
  return mu1_threshold(cst.gn_constant, cst.lambda0, p);
}

/// Lower bound for the boundary level:
/// nu_mu >= (3p-7)/(6p-6) (C (3p-3)/(2p+2))^{-4/(3p-7)} mu^{-(5-p)/(3p-7)}.
/// Evaluable for any mu > 0; the ordering nu > Lambda0 mu / 2 is only
/// guaranteed for mu < mu1.
inline double nu_lower_bound(const ProblemParams& prm, const Constants& cst) {
  double p = prm.p;
  double coeff = (3.0 * p - 7.0) / (6.0 * p - 6.0) *
                 std::pow(cst.gn_constant * (3.0 * p - 3.0) / (2.0 * p + 2.0),
                          -4.0 / (3.0 * p - 7.0));
  return coeff * std::pow(prm.mu, -(5.0 - p) / (3.0 * p - 7.0));
}

/// Smallness threshold of the ground multiplier bracket:
/// mu < C^{-2/(p-1)} ((3p-3)/(3p-7) Lambda0)^{-(3p-7)/(2p-2)}.
inline double lambda1_bracket_threshold(const Constants& cst, double p) {
  return std::pow(cst.gn_constant, -2.0 / (p - 1.0)) *
         std::pow((3.0 * p - 3.0) / (3.0 * p - 7.0) * cst.lambda0,
                  -(3.0 * p - 7.0) / (2.0 * p - 2.0));
}

/// Bracket for the ground-state multiplier at small mass:
/// -Lambda0 < lambda1 < -Lambda0 (1 - C ((3p-3)/(3p-7) Lambda0)^{(3p-7)/4} mu^{(p-1)/2}).
inline std::pair<double, double> lambda1_bracket(const Constants& cst, double p,
                                                 double mu) {
  double upper = -cst.lambda0 *
                 (1.0 - cst.gn_constant *
                            std::pow((3.0 * p - 3.0) / (3.0 * p - 7.0) * cst.lambda0,
                                     (3.0 * p - 7.0) / 4.0) *
                            std::pow(mu, (p - 1.0) / 2.0));
  return {-cst.lambda0, upper};
}

// --------------------------------------------------------------------------
// Secondary gradient-ascent check for the GN constant

/// Maximizes the GN quotient over grid fields by normalized gradient ascent.
/// Independent of the 1-D shooting route; accuracy is limited by the grid.
inline double gn_constant_by_ascent(const GridPtr& g, double p,
                                    int max_iter = 4000, double tol = 1e-10) {
  // seed: isotropic Gaussian, roughly soliton shaped
  Field u = tensor_field(
      g, [](double r) { return std::exp(-0.5 * r * r); },
      [](double z) { return std::exp(-0.5 * z * z); });
  double s = 1.0 / norm_l2(u);
  for (double& x : u.v) x *= s;

  const double a = (3.0 * p - 3.0) / 4.0, b = (5.0 - p) / 4.0;
  double q_prev = gn_quotient(u, p);
  double dt = 0.5;
  Field grad(g), lap(g);
  for (int it = 0; it < max_iter; ++it) {
    double K = kinetic(u), M = mass(u), P = power_term(u, p + 1.0);
    // gradient of log quotient: (p+1)|u|^{p-1}u/P - a*2*(-Lap u)/K - b*2*u/M
    apply_H(u, 0.0, 0.0, p, lap);  // -Lap u + V u; subtract the V part below
    const CylGrid& gg = *g;
    for (int i = 0; i < gg.nr; ++i)
      for (int j = 0; j < gg.nz; ++j) {
        std::size_t k = gg.idx(i, j);
        double negLap = lap.v[k] - gg.pot(i) * u.v[k];
        double up = std::pow(std::abs(u.v[k]), p - 1.0) * u.v[k];
        grad.v[k] = (p + 1.0) * up / P - 2.0 * a * negLap / K - 2.0 * b * u.v[k] / M;
      }
    zero_dirichlet_rows(grad);
    Field trial(g);
    double q_new = q_prev;
    while (dt > 1e-12) {
      for (std::size_t k = 0; k < u.v.size(); ++k)
        trial.v[k] = u.v[k] + dt * grad.v[k];
      zero_dirichlet_rows(trial);
      double nt = norm_l2(trial);
      if (nt > 0) {
        for (double& x : trial.v) x /= nt;
        q_new = gn_quotient(trial, p);
        if (q_new >= q_prev) break;
      }
      dt *= 0.5;
    }
    if (q_new < q_prev) break;
    u = trial;
    if (q_new - q_prev < tol * std::abs(q_new) && it > 20) {
      q_prev = q_new;
      break;
    }
    q_prev = q_new;
    dt *= 1.1;
  }
  return q_prev;
}

}  // namespace nlspc
