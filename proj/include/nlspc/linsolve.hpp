#pragma once

#include <functional>

#include "nlspc/grid.hpp"

namespace nlspc {

/// In-place Thomas solve of a tridiagonal system given by (sub, diag, sup).
/// No pivoting; the matrices here are diagonally scaled SPD tridiagonals.
inline void thomas_solve(std::span<const double> sub, std::span<const double> diag,
                         std::span<const double> sup, std::span<double> rhs,
                         std::span<double> cp_scratch) {
  const std::size_t n = diag.size();
  cp_scratch[0] = sup[0] / diag[0];
  rhs[0] = rhs[0] / diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    double m = 1.0 / (diag[i] - sub[i] * cp_scratch[i - 1]);
    cp_scratch[i] = sup[i] * m;
    rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) * m;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= cp_scratch[i] * rhs[i + 1];
}

/// Radial part of the discrete operator: tridiagonal rows of
/// -(u_rr + u_r/r) + r^2 u on the unknowns i = 0..nr-2 (Dirichlet at nr-1).
struct RadialOperator {
  std::vector<double> sub, diag, sup;  // size nr-1

  explicit RadialOperator(const CylGrid& g) {
    const int n = g.nr - 1;
    sub.assign(n, 0.0);
    diag.assign(n, 0.0);
    sup.assign(n, 0.0);
    const double ihr2 = 1.0 / (g.hr * g.hr);
    diag[0] = 4.0 * ihr2 + g.pot(0);
    sup[0] = -4.0 * ihr2;
    for (int i = 1; i < n; ++i) {
      double rp = g.r[i] + 0.5 * g.hr, rm = g.r[i] - 0.5 * g.hr;
      sub[i] = -rm * ihr2 / g.r[i];
      diag[i] = (rp + rm) * ihr2 / g.r[i] + g.pot(i);
      sup[i] = -rp * ihr2 / g.r[i];
    }
  }

  void apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = diag.size();
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += sub[i] * x[i - 1];
      if (i + 1 < n) s += sup[i] * x[i + 1];
      y[i] = s;
    }
  }
};

/// Exact solver for (H0 + sigma) x = b, H0 = -Lap + V, using the separable
/// structure: discrete cosine modes in z (exact eigenvectors of the axial
/// stencil with even reflection at 0 and Dirichlet at z_max) and Thomas
/// solves in r per mode.  Also the workhorse preconditioner for the Newton
/// and flow stages.  One instance per thread.
class SeparableSolver {
 public:
  explicit SeparableSolver(GridPtr g) : g_(std::move(g)), rad_(*g_) {
    const CylGrid& gr = *g_;
    M_ = gr.nz - 1;
    N_ = gr.nr - 1;
    cosmat_.resize(std::size_t(M_) * M_);
    beta_.resize(M_);
    for (int m = 0; m < M_; ++m) {
      double k = (m + 0.5) * kPi / gr.z_max;
      beta_[m] = (2.0 - 2.0 * std::cos(k * gr.hz)) / (gr.hz * gr.hz);
      for (int j = 0; j < M_; ++j)
        cosmat_[std::size_t(m) * M_ + j] = std::cos(k * gr.z[j]);
    }
    hat_.resize(std::size_t(N_) * M_);
    line_.resize(std::max(M_, N_));
    cp_.resize(N_);
    dshift_.resize(N_);
  }

  const CylGrid& grid() const { return *g_; }
  double beta0() const { return beta_[0]; }

  /// smallest sigma for which all mode systems stay positive definite is
  /// -(alpha0 + beta0); callers keep a margin above that.
  void solve(double sigma, std::span<const double> b, std::span<double> x) const {
    const CylGrid& g = *g_;
    const double scale = 2.0 / double(M_);
    // forward cosine transform along z for each radial line
    for (int i = 0; i < N_; ++i) {
      const double* bi = b.data() + g.idx(i, 0);
      for (int m = 0; m < M_; ++m) {
        const double* cm = cosmat_.data() + std::size_t(m) * M_;
        double s = 0.5 * cm[0] * bi[0];
        for (int j = 1; j < M_; ++j) s += cm[j] * bi[j];
        hat_[std::size_t(i) * M_ + m] = scale * s;
      }
    }
    // per-mode radial solves
    for (int m = 0; m < M_; ++m) {
      double sh = sigma + beta_[m];
      for (int i = 0; i < N_; ++i) {
        dshift_[i] = rad_.diag[i] + sh;
        line_[i] = hat_[std::size_t(i) * M_ + m];
      }
      thomas_solve(rad_.sub, dshift_, rad_.sup,
                   std::span<double>(line_.data(), N_),
                   std::span<double>(cp_.data(), N_));
      for (int i = 0; i < N_; ++i) hat_[std::size_t(i) * M_ + m] = line_[i];
    }
    // inverse transform
    std::fill(x.begin(), x.end(), 0.0);
    for (int i = 0; i < N_; ++i) {
      double* xi = x.data() + g.idx(i, 0);
      const double* hi = hat_.data() + std::size_t(i) * M_;
      for (int j = 0; j < M_; ++j) {
        double s = 0.0;
        for (int m = 0; m < M_; ++m) s += hi[m] * cosmat_[std::size_t(m) * M_ + j];
        xi[j] = s;
      }
    }
    for (int j = 0; j < g.nz; ++j) x[g.idx(g.nr - 1, j)] = 0.0;
    for (int i = 0; i < g.nr; ++i) x[g.idx(i, g.nz - 1)] = 0.0;
  }

 private:
  GridPtr g_;
  RadialOperator rad_;
  int M_ = 0, N_ = 0;
  std::vector<double> cosmat_, beta_;
  mutable std::vector<double> hat_, line_, cp_, dshift_;
};

// --------------------------------------------------------------------------
// MINRES in a weighted inner product

struct MinresResult {
  int iterations = 0;
  double rel_residual = 0;
  bool converged = false;
};

/// Preconditioned MINRES for operators symmetric w.r.t. the inner product
/// <a,b> = sum_k wgt_k a_k b_k.  Msolve must be SPD in the same metric.
/// Solves A x = b starting from x = 0.
template <class OpA, class OpM>
MinresResult minres(std::size_t n, OpA&& Aapply, OpM&& Msolve,
                    std::span<const double> wgt, std::span<const double> b,
                    std::span<double> x, double rtol, int maxit) {
  auto dot = [&](std::span<const double> a, std::span<const double> c) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += wgt[k] * a[k] * c[k];
    return s;
  };

  std::vector<double> r1(b.begin(), b.end()), r2(r1), y(n), v(n), w(n, 0.0),
      w1(n, 0.0), w2(n, 0.0);
  std::fill(x.begin(), x.end(), 0.0);

  Msolve(r1, std::span<double>(y));
  double beta1 = dot(r1, y);
  if (beta1 <= 0.0) return {0, 0.0, beta1 == 0.0};
  beta1 = std::sqrt(beta1);

  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1,
         cs = -1.0, sn = 0.0, oldeps = 0.0;
  MinresResult out;
  for (int itn = 1; itn <= maxit; ++itn) {
    double s = 1.0 / beta;
    for (std::size_t k = 0; k < n; ++k) v[k] = s * y[k];
    Aapply(std::span<const double>(v), std::span<double>(y));
    if (itn >= 2)
      for (std::size_t k = 0; k < n; ++k) y[k] -= (beta / oldb) * r1[k];
    double alfa = dot(v, y);
    for (std::size_t k = 0; k < n; ++k) y[k] -= (alfa / beta) * r2[k];
    r1 = r2;
    r2.assign(y.begin(), y.end());
    Msolve(std::span<const double>(r2), std::span<double>(y));
    oldb = beta;
    beta = dot(r2, y);
    if (beta < 0.0) break;  // preconditioner lost positivity
    beta = std::sqrt(beta);

    oldeps = epsln;
    double delta = cs * dbar + sn * alfa;
    double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::sqrt(gbar * gbar + beta * beta);
    gamma = std::max(gamma, 1e-300);
    cs = gbar / gamma;
    sn = beta / gamma;
    double phi = cs * phibar;
    phibar = sn * phibar;

    double denom = 1.0 / gamma;
    w1 = w2;
    w2 = w;
    for (std::size_t k = 0; k < n; ++k)
      w[k] = (v[k] - oldeps * w1[k] - delta * w2[k]) * denom;
    for (std::size_t k = 0; k < n; ++k) x[k] += phi * w[k];

    out.iterations = itn;
    out.rel_residual = phibar / beta1;
    if (out.rel_residual <= rtol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace nlspc
