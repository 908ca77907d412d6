#pragma once

#include <algorithm>
#include <memory>
#include <span>
#include <vector>

#include "nlspc/core.hpp"

namespace nlspc {

/// Axisymmetric, z-even discretization of R^3 on a cylinder
/// [0,r_max] x [-z_max, z_max].  A node (i,j) carries the value
/// u(r_i, |z_j|); the outer rows i = n_r-1 and j = n_z-1 are Dirichlet.
///
/// Two weight sets are kept:
///  * `wr`/`wz` (and their product `w`): the cell-measure weights the
///    discrete operator is self-adjoint against.  All solver inner products,
///    masses and energies use these.
///  * `wr_int`: end-corrected radial weights for plain quadrature of smooth
///    integrands (Gregory-type corrections at the axis and the outer rim).
struct CylGrid {
  int nr = 0, nz = 0;
  double r_max = 0, z_max = 0;
  double hr = 0, hz = 0;

  std::vector<double> r;       // radial coordinates, size nr
  std::vector<double> z;       // axial coordinates, size nz
  std::vector<double> wr;      // radial cell measure  (int r dr), size nr
  std::vector<double> wz;      // axial cell measure   (int dz on z>=0), size nz
  std::vector<double> wr_int;  // end-corrected radial quadrature weights
  std::vector<double> w;       // full 3-D weights 4*pi*wr_i*wz_j, size nr*nz

  std::size_t idx(int i, int j) const { return std::size_t(i) * nz + j; }
  std::size_t size() const { return std::size_t(nr) * nz; }
  double pot(int i) const { return r[i] * r[i]; }  // V = x1^2 + x2^2
};

using GridPtr = std::shared_ptr<const CylGrid>;

inline GridPtr build_grid(int n_r, int n_z, double r_max, double z_max) {
  require(n_r >= 8 && n_z >= 8, "build_grid: need n_r, n_z >= 8");
  require(finite(r_max) && finite(z_max) && r_max > 0 && z_max > 0,
          "build_grid: extents must be finite and positive");

  auto g = std::make_shared<CylGrid>();
  g->nr = n_r;
  g->nz = n_z;
  g->r_max = r_max;
  g->z_max = z_max;
  g->hr = r_max / (n_r - 1);
  g->hz = z_max / (n_z - 1);

  g->r.resize(n_r);
  g->z.resize(n_z);
  for (int i = 0; i < n_r; ++i) g->r[i] = i * g->hr;
  for (int j = 0; j < n_z; ++j) g->z[j] = j * g->hz;

  const double hr = g->hr, hz = g->hz;

  // Cell measure in r: half cell at the axis, int r dr elsewhere.  These are
  // the weights against which the 5-point operator below is self-adjoint.
  g->wr.assign(n_r, 0.0);
  g->wr[0] = hr * hr / 8.0;
  for (int i = 1; i < n_r - 1; ++i) g->wr[i] = g->r[i] * hr;
  g->wr[n_r - 1] = 0.5 * g->r[n_r - 1] * hr - hr * hr / 8.0;

  g->wz.assign(n_z, hz);
  g->wz[0] = 0.5 * hz;
  g->wz[n_z - 1] = 0.5 * hz;

  // Gregory-corrected radial rule: trapezoid of g(r)=r f(r) plus Euler-
  // Maclaurin end corrections.  Exact for constants, ~O(h^5) for smooth
  // integrands decaying at the rim.
  auto& wi = g->wr_int;
  wi.assign(n_r, 0.0);
  for (int i = 1; i < n_r - 1; ++i) wi[i] = g->r[i] * hr;
  wi[n_r - 1] = 0.5 * g->r[n_r - 1] * hr;
  wi[0] += hr * hr / 12.0;                    // + h^2/12 g'(0), g'(0) = f(0)
  wi[n_r - 1] -= hr * 3.0 * g->r[n_r - 1] / 24.0;  // - h^2/12 g'(R), one-sided
  wi[n_r - 2] += hr * 4.0 * g->r[n_r - 2] / 24.0;
  wi[n_r - 3] -= hr * g->r[n_r - 3] / 24.0;
  // - h^4/240 f''(0) with a one-sided stencil; vanishes on linear f.
  const double c4 = hr * hr / 240.0;
  wi[0] -= 2.0 * c4;
  wi[1] += 5.0 * c4;
  wi[2] -= 4.0 * c4;
  wi[3] += 1.0 * c4;

  g->w.resize(g->size());
  for (int i = 0; i < n_r; ++i)
    for (int j = 0; j < n_z; ++j)
      g->w[g->idx(i, j)] = 4.0 * kPi * g->wr[i] * g->wz[j];

  return g;
}

// --------------------------------------------------------------------------
// Field

struct Field {
  GridPtr grid;
  std::vector<double> v;

  Field() = default;
  explicit Field(GridPtr g) : grid(std::move(g)), v(grid->size(), 0.0) {}
  Field(GridPtr g, std::vector<double> vals) : grid(std::move(g)), v(std::move(vals)) {
    require(v.size() == grid->size(), "Field: size mismatch");
  }

  double& at(int i, int j) { return v[grid->idx(i, j)]; }
  double at(int i, int j) const { return v[grid->idx(i, j)]; }
};

inline void zero_dirichlet_rows(Field& f) {
  const CylGrid& g = *f.grid;
  for (int j = 0; j < g.nz; ++j) f.at(g.nr - 1, j) = 0.0;
  for (int i = 0; i < g.nr; ++i) f.at(i, g.nz - 1) = 0.0;
}

/// Build u(i,j) = fr(r_i) * fz(z_j) with Dirichlet rows zeroed.
template <class Fr, class Fz>
Field tensor_field(const GridPtr& g, Fr&& fr, Fz&& fz) {
  Field f(g);
  std::vector<double> a(g->nr), b(g->nz);
  for (int i = 0; i < g->nr; ++i) a[i] = fr(g->r[i]);
  for (int j = 0; j < g->nz; ++j) b[j] = fz(g->z[j]);
  for (int i = 0; i < g->nr; ++i)
    for (int j = 0; j < g->nz; ++j) f.at(i, j) = a[i] * b[j];
  zero_dirichlet_rows(f);
  return f;
}

// --------------------------------------------------------------------------
// Quadrature and inner products

/// High-accuracy integral of a smooth node function over R^3.
inline double integrate(const CylGrid& g, std::span<const double> f) {
  return 4.0 * kPi *
         sum_terms(g.size(), [&](std::size_t k) {
           std::size_t i = k / g.nz, j = k % g.nz;
           return g.wr_int[i] * g.wz[j] * f[k];
         });
}
inline double integrate(const Field& f) { return integrate(*f.grid, f.v); }

/// Solver inner product <u,v> = sum w u v (cell weights).
inline double inner(const CylGrid& g, std::span<const double> u,
                    std::span<const double> v) {
  return sum_terms(g.size(), [&](std::size_t k) { return g.w[k] * u[k] * v[k]; });
}
inline double inner(const Field& u, const Field& v) { return inner(*u.grid, u.v, v.v); }

inline double mass(const Field& u) { return inner(u, u); }
inline double norm_l2(const Field& u) { return std::sqrt(std::max(0.0, mass(u))); }

inline void renormalize_mass(Field& u, double mu) {
  double m = mass(u);
  require(m > 0, "renormalize_mass: zero field");
  double s = std::sqrt(mu / m);
  for (double& x : u.v) x *= s;
}

/// Discrete Dirichlet (kinetic) form: <(-Lap_h) u, v> written as an edge sum.
/// Exactly the quadratic form of apply_H's Laplacian part.
inline double kinetic_form(const CylGrid& g, std::span<const double> u,
                           std::span<const double> v) {
  const double cr = 4.0 * kPi / g.hr;  // 4*pi * r_(i+1/2) * hr * (du/hr)(dv/hr)
  const double cz = 4.0 * kPi / g.hz;
  double s = sum_terms(std::size_t(g.nr - 1) * g.nz, [&](std::size_t k) {
    std::size_t i = k / g.nz, j = k % g.nz;
    double rf = (g.r[i] + 0.5 * g.hr);
    double du = u[g.idx(int(i) + 1, int(j))] - u[g.idx(int(i), int(j))];
    double dv = v[g.idx(int(i) + 1, int(j))] - v[g.idx(int(i), int(j))];
    return cr * rf * g.wz[j] * du * dv;
  });
  s += sum_terms(std::size_t(g.nr) * (g.nz - 1), [&](std::size_t k) {
    std::size_t i = k / (g.nz - 1), j = k % (g.nz - 1);
    double du = u[g.idx(int(i), int(j) + 1)] - u[g.idx(int(i), int(j))];
    double dv = v[g.idx(int(i), int(j) + 1)] - v[g.idx(int(i), int(j))];
    return cz * g.wr[i] * du * dv;
  });
  return s;
}
inline double kinetic(const Field& u) { return kinetic_form(*u.grid, u.v, u.v); }

inline double confine_term(const Field& u) {
  const CylGrid& g = *u.grid;
  return sum_terms(g.size(), [&](std::size_t k) {
    std::size_t i = k / g.nz;
    return g.w[k] * g.pot(int(i)) * u.v[k] * u.v[k];
  });
}

inline double power_term(const Field& u, double q) {
  const CylGrid& g = *u.grid;
  return sum_terms(g.size(), [&](std::size_t k) {
    return g.w[k] * std::pow(std::abs(u.v[k]), q);
  });
}

// --------------------------------------------------------------------------
// Discrete operator

/// out = -Lap u + V u + lambda u - tau |u|^(p-1) u  on interior nodes,
/// 0 on the Dirichlet rows.  Axis and z=0 use the even-reflection stencil.
inline void apply_H(const Field& u, double lambda_shift, double tau, double p,
                    Field& out) {
  const CylGrid& g = *u.grid;
  require(out.grid.get() == &g, "apply_H: grid mismatch");
  const double ihr2 = 1.0 / (g.hr * g.hr);
  const double ihz2 = 1.0 / (g.hz * g.hz);
  const int nr = g.nr, nz = g.nz;

  for (int i = 0; i < nr - 1; ++i) {
    const double ri = g.r[i];
    const double Vi = ri * ri;
    for (int j = 0; j < nz - 1; ++j) {
      const double uc = u.at(i, j);
      double lap_r;
      if (i == 0) {
        lap_r = 4.0 * ihr2 * (u.at(1, j) - uc);
      } else {
        const double rp = ri + 0.5 * g.hr, rm = ri - 0.5 * g.hr;
        lap_r = (rp * (u.at(i + 1, j) - uc) + rm * (u.at(i - 1, j) - uc)) *
                ihr2 / ri;
      }
      double lap_z;
      if (j == 0) {
        lap_z = 2.0 * ihz2 * (u.at(i, 1) - uc);
      } else {
        lap_z = (u.at(i, j + 1) - 2.0 * uc + u.at(i, j - 1)) * ihz2;
      }
      double nl = tau == 0.0 ? 0.0
                             : tau * std::pow(std::abs(uc), p - 1.0) * uc;
      out.at(i, j) = -(lap_r + lap_z) + (Vi + lambda_shift) * uc - nl;
    }
  }
  for (int j = 0; j < nz; ++j) out.at(nr - 1, j) = 0.0;
  for (int i = 0; i < nr; ++i) out.at(i, nz - 1) = 0.0;
}

inline Field apply_H(const Field& u, double lambda_shift, double tau, double p) {
  Field out(u.grid);
  apply_H(u, lambda_shift, tau, p, out);
  return out;
}

// --------------------------------------------------------------------------
// Monotone cubic (Steffen) interpolation

/// Steffen's monotone cubic on a strictly increasing abscissa.  No overshoot,
/// so non-negative monotone data interpolates non-negatively up to roundoff.
class Steffen1D {
 public:
  Steffen1D(std::span<const double> x, std::span<const double> y)
      : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
    const std::size_t n = x_.size();
    require(n >= 2, "Steffen1D: need at least two nodes");
    s_.assign(n, 0.0);
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      d[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0.0) {
        s_[i] = 0.0;
      } else {
        double pst = (d[i - 1] * h[i] + d[i] * h[i - 1]) / (h[i - 1] + h[i]);
        double lim = 2.0 * std::min(std::abs(d[i - 1]), std::abs(d[i]));
        s_[i] = (std::abs(pst) > lim ? (pst > 0 ? lim : -lim) : pst);
      }
    }
    s_[0] = end_slope(d[0], n > 2 ? d[1] : d[0], h[0], n > 2 ? h[1] : h[0]);
    s_[n - 1] = end_slope(d[n - 2], n > 2 ? d[n - 3] : d[n - 2], h[n - 2],
                          n > 2 ? h[n - 3] : h[n - 2]);
  }

  /// Evaluate; clamps to 0 outside the abscissa range.
  double operator()(double xq) const {
    if (xq < x_.front() || xq > x_.back()) return 0.0;
    std::size_t k = locate(xq);
    double h = x_[k + 1] - x_[k];
    double d = (y_[k + 1] - y_[k]) / h;
    double a = (s_[k] + s_[k + 1] - 2.0 * d) / (h * h);
    double b = (3.0 * d - 2.0 * s_[k] - s_[k + 1]) / h;
    double dx = xq - x_[k];
    return y_[k] + dx * (s_[k] + dx * (b + dx * a));
  }

 private:
  static double end_slope(double d0, double d1, double h0, double h1) {
    double pst = d0 + (d0 - d1) * h0 / (h0 + h1);
    if (pst * d0 <= 0.0) return 0.0;
    if (std::abs(pst) > 2.0 * std::abs(d0)) return 2.0 * d0;
    return pst;
  }
  std::size_t locate(double xq) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), xq);
    std::size_t k = std::size_t(std::max<std::ptrdiff_t>(1, it - x_.begin())) - 1;
    return std::min(k, x_.size() - 2);
  }
  std::vector<double> x_, y_, s_;
};

// --------------------------------------------------------------------------
// Rescaling maps

struct ScaleStats {
  double mass_before = 0;
  double mass_after = 0;
  /// |after-before|/before; > 1e-3 signals an under-resolved dilation.
  double mass_rel_drift = 0;
  bool under_resolved = false;
};

namespace detail {

/// Resample amp * u(sx * r, sz * z) onto u's own grid, clamping to zero
/// outside the source extent and truncating negative undershoot at 0.
inline Field resample_scaled(const Field& u, double amp, double sx, double sz,
                             ScaleStats* stats) {
  const CylGrid& g = *u.grid;
  Field out(u.grid);

  // pass 1: interpolate along r at the query radii sx*r_i, every source row j
  std::vector<double> row(g.nr), tmp(std::size_t(g.nr) * g.nz);
  for (int j = 0; j < g.nz; ++j) {
    for (int i = 0; i < g.nr; ++i) row[i] = u.at(i, j);
    Steffen1D ir(std::span<const double>(g.r), row);
    for (int i = 0; i < g.nr; ++i) tmp[g.idx(i, j)] = ir(sx * g.r[i]);
  }
  // pass 2: interpolate along z; the query may fall on the even reflection
  std::vector<double> col(g.nz);
  for (int i = 0; i < g.nr; ++i) {
    for (int j = 0; j < g.nz; ++j) col[j] = tmp[g.idx(i, j)];
    Steffen1D iz(std::span<const double>(g.z), col);
    for (int j = 0; j < g.nz; ++j)
      out.at(i, j) = amp * iz(std::abs(sz * g.z[j]));
  }
  for (double& x : out.v)
    if (x < 0.0) x = 0.0;
  zero_dirichlet_rows(out);

  if (stats) {
    stats->mass_before = mass(u);
    stats->mass_after = mass(out);
    double expect = stats->mass_before * amp * amp / (sx * sx * sz);
    stats->mass_rel_drift =
        expect > 0 ? std::abs(stats->mass_after - expect) / expect : 0.0;
    stats->under_resolved = stats->mass_rel_drift > 1e-3;
  }
  return out;
}

}  // namespace detail

/// v_t(x) = t^{3/2} v(t x): mass-preserving 3-D dilation.
inline Field dilate3(const Field& u, double t, ScaleStats* stats = nullptr) {
  require(finite(t) && t > 0, "dilate3: t must be positive");
  if (t == 1.0) {
    if (stats) *stats = {mass(u), mass(u), 0.0, false};
    return u;
  }
  return detail::resample_scaled(u, std::pow(t, 1.5), t, t, stats);
}

/// v_t(x) = sqrt(t) v(x1, x2, t x3): axial dilation, 1-D mass preserved.
inline Field dilate_z(const Field& u, double t, ScaleStats* stats = nullptr) {
  require(finite(t) && t > 0, "dilate_z: t must be positive");
  if (t == 1.0) {
    if (stats) *stats = {mass(u), mass(u), 0.0, false};
    return u;
  }
  return detail::resample_scaled(u, std::sqrt(t), 1.0, t, stats);
}

enum class TmuDirection { forward, inverse };

/// T_mu u = mu^{2/(3p-7)} u(mu^{(p-1)/(3p-7)} x) maps mass mu to mass 1;
/// the inverse applies the reciprocal scaling.
inline Field t_mu_map(const Field& u, double mu, double p,
                      TmuDirection dir = TmuDirection::forward,
                      ScaleStats* stats = nullptr) {
  require(finite(mu) && mu > 0, "t_mu_map: mu must be in (0, inf)");
  double amp = std::pow(mu, 2.0 / (3.0 * p - 7.0));
  double sc = std::pow(mu, (p - 1.0) / (3.0 * p - 7.0));
  if (dir == TmuDirection::inverse) {
    amp = 1.0 / amp;
    sc = 1.0 / sc;
  }
  ScaleStats local;
  Field out = detail::resample_scaled(u, amp, sc, sc, &local);
  // drift relative to the exact image mass (mu -> 1 or 1 -> mu)
  double expect = local.mass_before * amp * amp / (sc * sc * sc);
  local.mass_rel_drift =
      expect > 0 ? std::abs(local.mass_after - expect) / expect : 0.0;
  local.under_resolved = local.mass_rel_drift > 1e-3;
  if (stats) *stats = local;
  return out;
}

/// Resample a field onto another grid (monotone cubic, zero outside the
/// source extent, undershoot truncated).
inline Field resample_to(const Field& src, const GridPtr& dst) {
  if (src.grid.get() == dst.get()) return src;
  const CylGrid& gs = *src.grid;
  const CylGrid& gd = *dst;
  Field out(dst);
  std::vector<double> row(gs.nr);
  std::vector<double> tmp(std::size_t(gd.nr) * gs.nz);
  for (int j = 0; j < gs.nz; ++j) {
    for (int i = 0; i < gs.nr; ++i) row[i] = src.at(i, j);
    Steffen1D ir(std::span<const double>(gs.r), row);
    for (int i = 0; i < gd.nr; ++i)
      tmp[std::size_t(i) * gs.nz + j] = ir(gd.r[i]);
  }
  std::vector<double> col(gs.nz);
  for (int i = 0; i < gd.nr; ++i) {
    for (int j = 0; j < gs.nz; ++j) col[j] = tmp[std::size_t(i) * gs.nz + j];
    Steffen1D iz(std::span<const double>(gs.z), col);
    for (int j = 0; j < gd.nz; ++j) out.at(i, j) = iz(gd.z[j]);
  }
  for (double& x : out.v)
    if (x < 0.0) x = 0.0;
  zero_dirichlet_rows(out);
  return out;
}

// --------------------------------------------------------------------------
// Random smooth test fields (deterministic given the seed)

inline Field random_bump_field(const GridPtr& g, std::uint64_t seed,
                               int n_bumps = 5) {
  Rng rng(seed);
  Field f(g);
  for (int b = 0; b < n_bumps; ++b) {
    double amp = rng.uniform(0.2, 1.0);
    double r0 = rng.uniform(0.0, 0.5 * g->r_max);
    double z0 = rng.uniform(0.0, 0.5 * g->z_max);
    double sr = rng.uniform(0.3, 1.2) * std::max(1.0, 0.1 * g->r_max);
    double sz = rng.uniform(0.3, 1.2) * std::max(1.0, 0.1 * g->z_max);
    for (int i = 0; i < g->nr; ++i)
      for (int j = 0; j < g->nz; ++j) {
        double dr = (g->r[i] - r0) / sr;
        double dz = (g->z[j] - z0) / sz;
        f.at(i, j) += amp * std::exp(-dr * dr - dz * dz);
      }
  }
  zero_dirichlet_rows(f);
  return f;
}

}  // namespace nlspc
