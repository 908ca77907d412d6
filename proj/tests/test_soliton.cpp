#include <catch2/catch_amalgamated.hpp>

#include "nlspc/functional.hpp"
#include "nlspc/soliton.hpp"
#include "oracle_helpers.hpp"

using namespace nlspc;

namespace {
const SolitonProfile& cubic_profile() {
  static SolitonProfile prof = shoot_Q(3.0);
  return prof;
}
}  // namespace

TEST_CASE("cubic soliton profile", "[soliton]") {
  const SolitonProfile& prof = cubic_profile();

  SECTION("plug-back residual in sup norm") {
    REQUIRE(prof.ode_sup_residual <= 1e-8);
  }
  SECTION("monotone positive profile") {
    for (std::size_t i = 0; i + 1 < prof.q.size(); ++i) {
      REQUIRE(prof.q[i] > 0.0);
      REQUIRE(prof.q[i + 1] < prof.q[i] + 1e-15);
    }
  }
  SECTION("exponential tail with unit rate") {
    // log Q is asymptotically linear with slope -> -sqrt(omega) = -1
    auto slope_at = [&](double r0) {
      std::size_t i = 0;
      while (i + 1 < prof.r.size() && prof.r[i] < r0) ++i;
      return (std::log(prof.q[i + 40]) - std::log(prof.q[i])) /
             (prof.r[i + 40] - prof.r[i]);
    };
    double s15 = slope_at(15.0), s20 = slope_at(20.0);
    REQUIRE(std::abs(s20 + 1.0) < 0.1);
    REQUIRE(std::abs(s20 + 1.0) < std::abs(s15 + 1.0) + 0.05);
  }
  SECTION("free-space virial identity") {
    double g_free = prof.kinetic_Q - 0.75 * prof.nonlin_Q;  // p = 3
    REQUIRE(std::abs(g_free) <= 1e-6 * prof.kinetic_Q);
  }
  SECTION("mass matches an independent relaxation solve") {
    double m_oracle = oracle::relaxed_soliton_mass(3.0);
    REQUIRE(std::abs(prof.mass_Q - m_oracle) <= 1e-3 * prof.mass_Q);
  }
  SECTION("bisection from a different bracket lands on the same branch") {
    SolitonProfile other = shoot_Q(3.0, 1e-13, 40.0);
    REQUIRE(std::abs(other.q0 - prof.q0) <= 1e-11 * prof.q0);
  }
}

TEST_CASE("frequency-mass correspondence", "[soliton]") {
  const SolitonProfile& prof = cubic_profile();
  const double p = prof.p;

  SECTION("the profile mass is the fixed point") {
    REQUIRE(std::abs(omega_for_mass(prof.mass_Q, prof) - 1.0) <= 1e-12);
  }
  SECTION("unit mass frequency") {
    double want = std::pow(prof.mass_Q, 2.0 * (p - 1.0) / (3.0 * p - 7.0));
    REQUIRE(std::abs(omega_for_mass(1.0, prof) - want) <= 1e-12 * want);
  }
  SECTION("strictly decreasing in the mass") {
    double prev = omega_for_mass(0.1, prof);
    for (double mu : {0.5, 1.0, 5.0, 20.0}) {
      double cur = omega_for_mass(mu, prof);
      REQUIRE(cur < prev);
      prev = cur;
    }
  }
  SECTION("mass maps back within half a percent across two decades") {
    for (double mu : {0.1, 1.0, 10.0}) {
      double om = omega_for_mass(mu, prof);
      double ext = 26.0 / std::sqrt(om);
      auto g = build_grid(192, 192, ext, ext);
      Field f = u_omega_field(om, prof, g);
      REQUIRE(std::abs(mass(f) - mu) <= 5e-3 * mu);
    }
  }
}

TEST_CASE("soliton sampled on the cylinder grid", "[soliton]") {
  const SolitonProfile& prof = cubic_profile();
  auto g = build_grid(192, 192, 24.0, 24.0);

  SECTION("canonical frequency keeps its mass") {
    Field f = u_omega_field(1.0, prof, g);
    REQUIRE(std::abs(mass(f) - prof.mass_Q) <= 5e-3 * prof.mass_Q);
  }
  SECTION("central value scales like omega^{1/(p-1)}") {
    auto g4 = build_grid(192, 192, 12.0, 12.0);
    Field f1 = u_omega_field(1.0, prof, g);
    Field f4 = u_omega_field(4.0, prof, g4);
    REQUIRE(std::abs(f4.at(0, 0) - 2.0 * f1.at(0, 0)) <= 1e-9);
  }
  SECTION("free virial balance survives the resampling") {
    auto gf = build_grid(256, 256, 20.0, 20.0);
    Field f = u_omega_field(1.0, prof, gf);
    EnergyReport rep = evaluate(f, ProblemParams(3.0, prof.mass_Q));
    REQUIRE(std::abs(rep.g_indicator) <= 0.01 * rep.kinetic);
  }
  SECTION("clipped support is flagged") {
    bool clipped = false;
    u_omega_field(1e-4, prof, g, &clipped);  // width ~ 100 >> extent
    REQUIRE(clipped);
  }
}

TEST_CASE("best constant from the extremal profile", "[soliton]") {
  const SolitonProfile& prof = cubic_profile();
  const double C = gn_constant_from_Q(prof);

  SECTION("scale invariance along the frequency family") {
    auto g = build_grid(192, 192, 24.0, 24.0);
    for (double om : {1.0, 2.5}) {
      auto gg = build_grid(256, 256, 20.0 / std::sqrt(om), 20.0 / std::sqrt(om));
      double q = gn_quotient(u_omega_field(om, prof, gg), 3.0);
      REQUIRE(std::abs(q - C) <= 0.01 * C);
    }
  }
  SECTION("dominates random-field quotients") {
    auto g = build_grid(96, 96, 10.0, 10.0);
    for (std::uint64_t s = 100; s < 125; ++s) {
      Field u = random_bump_field(g, s);
      REQUIRE(gn_quotient(u, 3.0) <= C * (1.0 + 5e-3));
    }
  }
  SECTION("agrees with the grid ascent route") {
    double C_grid = gn_constant_by_ascent(build_grid(160, 160, 12.0, 12.0), 3.0);
    REQUIRE(std::abs(C_grid - C) <= 0.01 * C);
  }
}

TEST_CASE("a second exponent exercises the general formulas", "[soliton]") {
  SolitonProfile prof = shoot_Q(3.5, 1e-12);
  REQUIRE(prof.ode_sup_residual <= 1e-7);
  double gn = (3.0 * 3.5 - 3.0) / (2.0 * 3.5 + 2.0);
  REQUIRE(std::abs(prof.kinetic_Q - gn * prof.nonlin_Q) <= 1e-6 * prof.kinetic_Q);
  REQUIRE(gn_constant_from_Q(prof) > 0.0);
}
