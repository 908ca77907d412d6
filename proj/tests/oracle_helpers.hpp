#pragma once

// Test-only oracles, kept independent of the implementation paths they
// check: plain-loop quadratures, a from-scratch stencil application, and a
// 1-D relaxation solver for the free soliton.

#include <cmath>
#include <functional>
#include <vector>

#include "nlspc/grid.hpp"

namespace oracle {

/// adaptive Simpson, written here so quadrature tests do not lean on the
/// library's own integrator
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double tol = 1e-12, int depth = 60) {
  struct R {
    const std::function<double(double)>& f;
    double go(double a0, double b0, double fa, double fm, double fb,
              double whole, double tol, int depth) const {
      double m = 0.5 * (a0 + b0);
      double flm = f(0.5 * (a0 + m)), frm = f(0.5 * (m + b0));
      double left = (m - a0) / 6.0 * (fa + 4.0 * flm + fm);
      double right = (b0 - m) / 6.0 * (fm + 4.0 * frm + fb);
      if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
      return go(a0, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
             go(m, b0, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
  } rec{f};
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return rec.go(a, b, fa, fm, fb, whole, tol, depth);
}

/// flat-loop evaluation of the four functionals from the stored weights
struct FlatTerms {
  double mass = 0, kinetic = 0, confine = 0, nonlin = 0;
};

inline FlatTerms flat_terms(const nlspc::Field& u, double p) {
  const nlspc::CylGrid& g = *u.grid;
  FlatTerms t;
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.nz; ++j) {
      double w = 4.0 * nlspc::kPi * g.wr[i] * g.wz[j];
      double val = u.at(i, j);
      t.mass += w * val * val;
      t.confine += w * g.r[i] * g.r[i] * val * val;
      t.nonlin += w * std::pow(std::abs(val), p + 1.0);
    }
  for (int i = 0; i + 1 < g.nr; ++i)
    for (int j = 0; j < g.nz; ++j) {
      double du = u.at(i + 1, j) - u.at(i, j);
      t.kinetic += 4.0 * nlspc::kPi * (g.r[i] + 0.5 * g.hr) * g.hr * g.wz[j] *
                   (du / g.hr) * (du / g.hr);
    }
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j + 1 < g.nz; ++j) {
      double du = u.at(i, j + 1) - u.at(i, j);
      t.kinetic += 4.0 * nlspc::kPi * g.wr[i] * g.hz * (du / g.hz) * (du / g.hz);
    }
  return t;
}

/// from-scratch application of the axisymmetric stencil
inline nlspc::Field brute_stencil(const nlspc::Field& u, double lambda,
                                  double tau, double p) {
  const nlspc::CylGrid& g = *u.grid;
  nlspc::Field out(u.grid);
  for (int i = 0; i < g.nr - 1; ++i)
    for (int j = 0; j < g.nz - 1; ++j) {
      double uc = u.at(i, j);
      double lap;
      if (i == 0) {
        lap = 4.0 * (u.at(1, j) - uc) / (g.hr * g.hr);
      } else {
        double urr = (u.at(i + 1, j) - 2.0 * uc + u.at(i - 1, j)) / (g.hr * g.hr);
        double ur = (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * g.hr);
        lap = urr + ur / g.r[i];
      }
      if (j == 0)
        lap += 2.0 * (u.at(i, 1) - uc) / (g.hz * g.hz);
      else
        lap += (u.at(i, j + 1) - 2.0 * uc + u.at(i, j - 1)) / (g.hz * g.hz);
      out.at(i, j) = -lap + (g.r[i] * g.r[i] + lambda) * uc -
                     tau * std::pow(std::abs(uc), p - 1.0) * uc;
    }
  return out;
}

/// independent route to the free soliton's squared norm: minimize the
/// quadratic part at fixed L^{p+1} content on a radial mesh (imaginary-time
/// relaxation with a projective rescale at the end)
inline double relaxed_soliton_mass(double p, int n = 3000, double rmax = 25.0) {
  const double h = rmax / n;
  std::vector<double> u(n, 0.0), grad(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double r = (i + 1) * h;
    u[i] = 2.0 * std::exp(-0.5 * r * r);
  }
  auto theta = [&]() {
    // (int |u'|^2 + u^2) / int u^{p+1} over the radial measure r^2 dr
    double quad = 0.0, pow_ = 0.0;
    for (int i = 0; i < n; ++i) {
      double r = (i + 1) * h;
      double up = (i + 1 < n ? u[i + 1] : 0.0);
      double um = (i > 0 ? u[i - 1] : u[0]);  // even at the origin
      double du = 0.5 * (up - um) / h;
      quad += (du * du + u[i] * u[i]) * r * r * h;
      pow_ += std::pow(std::abs(u[i]), p + 1.0) * r * r * h;
    }
    return quad / pow_;
  };
  double dt = 0.2 * h * h;
  for (int it = 0; it < 200000; ++it) {
    double th = theta();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      double r = (i + 1) * h;
      double up = (i + 1 < n ? u[i + 1] : 0.0);
      double um = (i > 0 ? u[i - 1] : u[0]);
      double lap = (up - 2.0 * u[i] + um) / (h * h) + (up - um) / (h * r);
      grad[i] = -lap + u[i] - th * std::pow(std::abs(u[i]), p - 1.0) * u[i];
      worst = std::max(worst, std::abs(grad[i]));
    }
    if (worst < 1e-10) break;
    for (int i = 0; i < n; ++i) u[i] = std::max(0.0, u[i] - dt * grad[i]);
  }
  double c = std::pow(theta(), 1.0 / (p - 1.0));
  double m = 0.0;
  for (int i = 0; i < n; ++i) {
    double r = (i + 1) * h;
    m += c * c * u[i] * u[i] * r * r * h;
  }
  return 4.0 * nlspc::kPi * m;
}

}  // namespace oracle
