#pragma once

#include <fstream>

#include "nlspc/grid.hpp"

namespace nlspc {

/// Radial profile of the free soliton Q solving Q'' + (2/r)Q' - Q + Q^p = 0,
/// Q'(0) = 0, Q > 0, Q -> 0.  Sampled on a fine uniform radial mesh with an
/// analytic e^{-r}/r tail grafted where the integration leaves the decaying
/// branch.
struct SolitonProfile {
  double p = 3.0;
  double q0 = 0;        // central value Q(0)
  double omega = 1.0;   // frequency of the equation this profile solves
  std::vector<double> r;
  std::vector<double> q;
  double mass_Q = 0;    // ||Q||_2^2
  double kinetic_Q = 0; // int |grad Q|^2
  double nonlin_Q = 0;  // int Q^{p+1}
  double shoot_tol = 0;
  double ode_sup_residual = 0;
};

namespace detail {

struct ShootState {
  enum class Outcome { crossed, undershot, decayed } outcome;
  double r_event = 0;
};

/// RK4 integration of the radial ODE written as a first-order system in
/// (Q, Q'); fixed fine step, series start at the axis.  Returns the
/// classification of the shot and optionally records the trajectory.
inline ShootState integrate_shot(double p, double a, double r_end, double dr,
                                 std::vector<double>* rs, std::vector<double>* qs,
                                 std::vector<double>* dqs) {
  auto f = [&](double r, double Q, double P, double& dQ, double& dP) {
    dQ = P;
    double nl = std::pow(std::abs(Q), p - 1.0) * Q;
    dP = (r > 0 ? -2.0 / r * P : 0.0) + Q - nl;
  };
  // series start Q = a + c2 r^2 + c4 r^4 + c6 r^6 regularizes the 2/r term;
  // hand the integrator a start where that coefficient is tame
  const double fp = 1.0 - p * std::pow(a, p - 1.0);
  const double fpp = -p * (p - 1.0) * std::pow(a, p - 2.0);
  const double c2 = (a - std::pow(a, p)) / 6.0;
  const double c4 = c2 * fp / 20.0;
  const double c6 = (fp * c4 + 0.5 * fpp * c2 * c2) / 42.0;
  auto series = [&](double rr, double& Qv, double& Pv) {
    double r2 = rr * rr;
    Qv = a + r2 * (c2 + r2 * (c4 + r2 * c6));
    Pv = rr * (2.0 * c2 + r2 * (4.0 * c4 + r2 * 6.0 * c6));
  };
  const int k0 = std::max(4, int(std::round(0.005 / dr)));
  double r = k0 * dr;
  double Q, P;
  series(r, Q, P);
  if (rs) {
    for (int k = 0; k <= k0; ++k) {
      double rk = k * dr, Qk, Pk;
      series(rk, Qk, Pk);
      rs->push_back(rk);
      qs->push_back(Qk);
      dqs->push_back(Pk);
    }
  }
  ShootState st{ShootState::Outcome::decayed, r_end};
  while (r < r_end) {
    // substep near the axis where the 2/r coefficient is steep
    const int nsub = r < 0.05 ? 8 : 1;
    const double h = dr / nsub;
    for (int sdx = 0; sdx < nsub; ++sdx) {
      double k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p;
      f(r, Q, P, k1q, k1p);
      f(r + 0.5 * h, Q + 0.5 * h * k1q, P + 0.5 * h * k1p, k2q, k2p);
      f(r + 0.5 * h, Q + 0.5 * h * k2q, P + 0.5 * h * k2p, k3q, k3p);
      f(r + h, Q + h * k3q, P + h * k3p, k4q, k4p);
      Q += h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
      P += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
      r += h;
    }
    if (rs) {
      rs->push_back(r);
      qs->push_back(Q);
      dqs->push_back(P);
    }
    if (Q <= 0.0) {
      st.outcome = ShootState::Outcome::crossed;
      st.r_event = r;
      return st;
    }
    if (P >= 0.0 && Q < a) {  // turned around below the start: undershoot
      st.outcome = ShootState::Outcome::undershot;
      st.r_event = r;
      return st;
    }
  }
  return st;
}

}  // namespace detail

/// Bisection shooting for the canonical soliton (omega = 1).  The optional
/// bracket start exists so independent runs can confirm the uniqueness of
/// the decaying branch.
inline SolitonProfile shoot_Q(double p, double tol = 1e-13,
                              double a_hi_init = 0.0) {
  require(p > 7.0 / 3.0 && p < 5.0, "shoot_Q: need 7/3 < p < 5");

  const double r_probe = 30.0;
  const double dr = 5e-4;

  // bracket: a_lo at the zero-energy amplitude (undershoots), a_hi found by
  // doubling until the shot crosses zero
  double a_lo = std::pow(0.5 * (p + 1.0), 1.0 / (p - 1.0));
  double a_hi = a_hi_init > a_lo ? a_hi_init : 2.0 * a_lo;
  for (int k = 0; k < 60; ++k) {
    auto st = detail::integrate_shot(p, a_hi, r_probe, dr, nullptr, nullptr, nullptr);
    if (st.outcome == detail::ShootState::Outcome::crossed) break;
    a_hi *= 2.0;
    if (k == 59) throw std::runtime_error("shoot_Q: bisection bracket exhausted");
  }
  for (int k = 0; k < 200 && (a_hi - a_lo) > tol * a_hi; ++k) {
    double a = 0.5 * (a_lo + a_hi);
    auto st = detail::integrate_shot(p, a, r_probe, dr, nullptr, nullptr, nullptr);
    if (st.outcome == detail::ShootState::Outcome::crossed)
      a_hi = a;
    else
      a_lo = a;
  }
  const double a = 0.5 * (a_lo + a_hi);

  // final pass with trajectory; graft the analytic tail where Q gets small
  std::vector<double> rs, qs, dqs;
  detail::integrate_shot(p, a, r_probe, dr, &rs, &qs, &dqs);

  SolitonProfile prof;
  prof.p = p;
  prof.q0 = a;
  prof.shoot_tol = tol;

  // matching radius: last sample on the monotone decaying branch above the
  // forward-error floor
  std::size_t im = rs.size() - 1;
  for (std::size_t i = 1; i < rs.size(); ++i) {
    if (qs[i] <= 1e-7 * a || qs[i] >= qs[i - 1]) {
      im = i - 1;
      break;
    }
  }
  double rm = rs[im], qm = qs[im];
  double ctail = qm * rm * std::exp(rm);
  double r_end = rm;
  while (ctail * std::exp(-r_end) / r_end > 1e-12 * a && r_end < 80.0)
    r_end += dr;

  prof.r.assign(rs.begin(), rs.begin() + im + 1);
  prof.q.assign(qs.begin(), qs.begin() + im + 1);
  for (double rr = rm + dr; rr <= r_end + 0.5 * dr; rr += dr) {
    prof.r.push_back(rr);
    prof.q.push_back(ctail * std::exp(-rr) / rr);
  }
  if (prof.q.back() > 1e-11 * a)
    throw std::runtime_error("shoot_Q: tail not decayed at r_end");

  // norms by Simpson on the fine mesh (odd sample count enforced by the
  // uniform step; fall back to trapezoid on the last cell if needed)
  auto radial_int = [&](auto&& fint) {
    const std::size_t n = prof.r.size();
    double s = 0.0;
    std::size_t i = 0;
    for (; i + 2 < n; i += 2) {
      double h2 = prof.r[i + 2] - prof.r[i];
      s += h2 / 6.0 * (fint(i) + 4.0 * fint(i + 1) + fint(i + 2));
    }
    if (i + 1 < n)
      s += 0.5 * (prof.r[i + 1] - prof.r[i]) * (fint(i) + fint(i + 1));
    return 4.0 * kPi * s;
  };
  std::vector<double> dq(prof.r.size());
  {
    // derivative samples: integrated values where available, tail analytic
    for (std::size_t i = 0; i <= im; ++i) dq[i] = dqs[i];
    for (std::size_t i = im + 1; i < prof.r.size(); ++i) {
      double rr = prof.r[i];
      dq[i] = -ctail * std::exp(-rr) * (1.0 / rr + 1.0 / (rr * rr));
    }
  }
  prof.mass_Q = radial_int([&](std::size_t i) { return sq(prof.q[i]) * sq(prof.r[i]); });
  prof.kinetic_Q = radial_int([&](std::size_t i) { return sq(dq[i]) * sq(prof.r[i]); });
  prof.nonlin_Q = radial_int(
      [&](std::size_t i) { return std::pow(prof.q[i], p + 1.0) * sq(prof.r[i]); });

  // plug-back residual on the integrated branch: Q'' from a fourth-order
  // stencil on the stored Q' samples, everything else straight from the data
  double res = 0.0;
  for (std::size_t i = 3; i + 3 < im; ++i) {
    double h = prof.r[i + 1] - prof.r[i];
    double qpp = (-dqs[i + 2] + 8.0 * dqs[i + 1] - 8.0 * dqs[i - 1] +
                  dqs[i - 2]) / (12.0 * h);
    double rr = prof.r[i];
    res = std::max(res, std::abs(qpp + 2.0 / rr * dqs[i] - prof.q[i] +
                                 std::pow(prof.q[i], p)));
  }
  prof.ode_sup_residual = res;
  return prof;
}

/// Unique frequency for which the rescaled soliton has mass mu:
/// omega_mu = (||Q||_2^2 / mu)^{2(p-1)/(3p-7)}.
inline double omega_for_mass(double mu, const SolitonProfile& prof) {
  require(mu > 0, "omega_for_mass: mu must be positive");
  return std::pow(prof.mass_Q / mu, 2.0 * (prof.p - 1.0) / (3.0 * prof.p - 7.0));
}

/// Samples omega^{1/(p-1)} Q(sqrt(omega) |x|) onto the cylindrical grid.
/// Returns the field; clipped tail mass above 0.1% flags under-resolution.
inline Field u_omega_field(double omega, const SolitonProfile& prof,
                           const GridPtr& g, bool* clipped = nullptr) {
  require(omega > 0, "u_omega_field: omega must be positive");
  const CylGrid& gr = *g;
  Steffen1D interp(prof.r, prof.q);
  const double amp = std::pow(omega, 1.0 / (prof.p - 1.0));
  const double s = std::sqrt(omega);
  Field f(g);
  for (int i = 0; i < gr.nr; ++i)
    for (int j = 0; j < gr.nz; ++j) {
      double rad = std::hypot(gr.r[i], gr.z[j]);
      f.at(i, j) = amp * interp(s * rad);
    }
  for (double& x : f.v)
    if (x < 0.0) x = 0.0;
  zero_dirichlet_rows(f);
  if (clipped) {
    double expect = prof.mass_Q * std::pow(omega, (7.0 - 3.0 * prof.p) /
                                                      (2.0 * (prof.p - 1.0)));
    *clipped = std::abs(mass(f) - expect) > 1e-3 * expect;
  }
  return f;
}

/// Best Gagliardo-Nirenberg constant from the extremal profile.
inline double gn_constant_from_Q(const SolitonProfile& prof) {
  return prof.nonlin_Q /
         (std::pow(prof.kinetic_Q, (3.0 * prof.p - 3.0) / 4.0) *
          std::pow(prof.mass_Q, (5.0 - prof.p) / 4.0));
}

inline void export_profile(const SolitonProfile& prof, const std::string& path) {
  std::ofstream out(path);
  require(bool(out), "export_profile: cannot open " + path);
  out.precision(17);
  for (std::size_t i = 0; i < prof.r.size(); ++i)
    out << prof.r[i] << " " << prof.q[i] << "\n";
}

}  // namespace nlspc
