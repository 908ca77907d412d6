#include <catch2/catch_amalgamated.hpp>

#include "nlspc/study.hpp"

using namespace nlspc;

namespace {
const SolitonProfile& cubic_profile() {
  static SolitonProfile prof = shoot_Q(3.0);
  return prof;
}
double mu1_cubic() {
  static double v = mu1_threshold(gn_constant_from_Q(cubic_profile()), 2.0, 3.0);
  return v;
}
}  // namespace

TEST_CASE("domain sweep reproduces the truncation limits", "[study]") {
  double mu = 0.5 * mu1_cubic();
  ProblemParams prm(3.0, mu);
  const double h = 0.0625;
  std::vector<double> extents{5.0, 6.25, 7.5};
  DomainSweepResult sweep = domain_sweep(prm, extents, h, cubic_profile());

  INFO("failures: " << (sweep.failures.empty() ? "none" : sweep.failures[0]));
  REQUIRE(sweep.ok());
  REQUIRE(sweep.records.size() == 3);
  for (std::size_t k = 0; k + 1 < sweep.records.size(); ++k) {
    REQUIRE(sweep.records[k].lambda_domain > sweep.records[k + 1].lambda_domain);
    REQUIRE(sweep.records[k].c_level > sweep.records[k + 1].c_level);
    REQUIRE(sweep.records[k + 1].m_level <= sweep.records[k].m_level + 1e-8);
  }
  for (const auto& r : sweep.records) REQUIRE(r.separated);
  REQUIRE(std::isfinite(sweep.c_extrapolated));
  REQUIRE(sweep.c_extrapolated < sweep.records.back().c_level);
  // the Aitken limit stays consistent with the finest truncations
  REQUIRE(std::abs(sweep.c_extrapolated - sweep.records.back().c_level) <
          0.2 * sweep.records.back().c_level);
}

TEST_CASE("mass sweep captures the small-mass asymptotics", "[study]") {
  std::vector<double> mus{0.32, 0.16};
  MuSweepResult sweep = mu_sweep(3.0, mus, cubic_profile());

  INFO("failures: " << (sweep.failures.empty() ? "none" : sweep.failures[0]));
  REQUIRE(sweep.ok());
  REQUIRE(sweep.records[1].lambda2 > sweep.records[0].lambda2);
  REQUIRE(sweep.records[1].h_ratio < sweep.records[0].h_ratio);
  REQUIRE(sweep.records[1].rescaled_distance < sweep.records[0].rescaled_distance);
  REQUIRE(std::abs(sweep.lambda2_slope + 2.0) <= 0.15);
  for (const auto& r : sweep.records) {
    REQUIRE(r.separated);
    REQUIRE(r.plugback1 <= 1e-6);
    REQUIRE(r.plugback2 <= 1e-6);
  }
}

TEST_CASE("rescaled-frame identity", "[study]") {
  double mu = 0.16;
  ProblemParams prm(3.0, mu);
  auto g = mpass_grid(3.0, mu, cubic_profile());
  MPassConfig cfg;
  SolveResult u2 = solve_mountain_pass(prm, g, cfg, cubic_profile());
  REQUIRE(u2.converged);

  RescaledFrameReport rep = rescaled_frame_check(u2, mu);
  REQUIRE(rep.scale_factor == std::pow(mu, 1.0));  // (5-p)/(3p-7) = 1 at p = 3
  REQUIRE(rep.mass_drift <= 5e-3);
  REQUIRE(rep.rel_error <= 0.01);
  REQUIRE(std::abs(rep.omega_transformed - mu * mu * u2.multiplier) <= 1e-12);

  SECTION("unit mass is the identity") {
    SolveResult copy = u2;
    copy.params.mu = 1.0;
    // the map at mu = 1 leaves the field alone
    Field same = t_mu_map(u2.field, 1.0, 3.0);
    for (std::size_t k = 0; k < same.v.size(); ++k)
      REQUIRE(std::abs(same.v[k] - u2.field.v[k]) <= 1e-14);
  }
}

TEST_CASE("weak-form diagnostic on a converged ground state", "[study]") {
  double mu = 0.25 * mu1_cubic();
  ProblemParams prm(3.0, mu);
  auto g = ground_grid(3.0, mu);
  EigenResult eig = first_eigenpair(g);
  SolverOptions o;
  o.level_ref = eig.eigenvalue;
  SolveResult u1 = solve_ground(prm, g, reduced_ground_guess(prm, g), o);
  REQUIRE(u1.converged);

  std::vector<double> Rs{0.3 * g->z_max, 0.5 * g->z_max, 0.7 * g->z_max,
                         0.85 * g->z_max};
  LiouvilleReport rep = liouville_diagnostic(u1.field, u1.multiplier, Rs, 3.0);

  SECTION("generalized identity closes to quadrature precision") {
    REQUIRE(rep.rows.size() == 4);
    for (const auto& row : rep.rows)
      REQUIRE(row.residual_generalized <= 1e-4);
  }
  SECTION("decomposition matches the direct weak-form pairing") {
    TransverseGround tg = transverse_ground(*g);
    for (const auto& row : rep.rows) {
      // rebuild the test function and pair it with the residual operator
      Field psi(g);
      double k = 0.5 * kPi / row.R;
      double amp = std::sqrt(2.0 * row.R / kPi);
      for (int i = 0; i < g->nr; ++i)
        for (int j = 0; j < g->nz; ++j) {
          double z = g->z[j];
          psi.at(i, j) =
              z <= row.R ? tg.values[i] * amp * std::cos(k * z) : 0.0;
        }
      double direct = inner(apply_H(u1.field, u1.multiplier, 1.0, 3.0), psi);
      double assembled = row.lhs + row.shift_term - row.w_term - row.v_term;
      double scale = std::max(std::abs(row.v_term), std::abs(row.lhs));
      REQUIRE(std::abs(direct - assembled) <= 1e-10 * scale);
    }
  }
  SECTION("dropping the shift term leaves a defect growing like sqrt(R)") {
    for (const auto& row : rep.rows)
      REQUIRE(row.residual_pure > 100.0 * row.residual_generalized);
    REQUIRE(rep.shift_growth_rate > 0.2);
    REQUIRE(rep.shift_growth_rate < 0.8);
  }
  SECTION("zero field produces an all-zero report") {
    LiouvilleReport zr = liouville_diagnostic(Field(g), -1.0, Rs, 3.0);
    for (const auto& row : zr.rows) {
      REQUIRE(row.lhs == 0.0);
      REQUIRE(row.w_term == 0.0);
      REQUIRE(row.v_term == 0.0);
      REQUIRE(row.shift_term == 0.0);
      REQUIRE(row.residual_generalized == 0.0);
    }
  }
  SECTION("radii beyond the grid are rejected") {
    std::vector<double> bad{2.0 * g->z_max};
    REQUIRE_THROWS_AS(liouville_diagnostic(u1.field, u1.multiplier, bad, 3.0),
                      std::invalid_argument);
  }
}

TEST_CASE("grid sizing helpers track the concentration scales", "[study]") {
  SECTION("ground grids widen as the mass shrinks") {
    auto g1 = ground_grid(3.0, 0.32);
    auto g2 = ground_grid(3.0, 0.16);
    REQUIRE(g2->z_max > 1.5 * g1->z_max);
  }
  SECTION("excited grids shrink proportionally to the rescaling") {
    auto g1 = mpass_grid(3.0, 0.32, cubic_profile());
    auto g2 = mpass_grid(3.0, 0.16, cubic_profile());
    REQUIRE(std::abs(g1->r_max / g2->r_max - 2.0) <= 1e-12);
  }
}
