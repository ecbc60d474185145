#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "eqm/gas.hpp"
#include "eqm/rng.hpp"

using namespace eqm;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("semicircle density examples") {
  // verbatim form: (1/(pi g)) sqrt(2/g - x^2)
  CHECK(semicircle_density(0.0, 2.0) == doctest::Approx(1.0 / (2.0 * kPi)));
  CHECK(semicircle_density(1.0, 2.0) == doctest::Approx(0.0));
  CHECK(semicircle_density(5.0, 2.0) == 0.0);
  // its mass is 1/g^2: radius R = sqrt(2/g), integral = pi R^2 / 2 / (pi g)
  double mass = 0.0;
  int n = 20000;
  double r = std::sqrt(2.0 / 2.0);
  for (int i = 0; i < n; ++i) {
    double x = -r + 2.0 * r * (i + 0.5) / n;
    mass += semicircle_density(x, 2.0) * 2.0 * r / n;
  }
  CHECK(mass == doctest::Approx(1.0 / 4.0).epsilon(1e-4));
}

TEST_CASE("normalized density integrates to one and the CDF is consistent") {
  for (double g : {0.5, 1.0, 2.0, 3.7}) {
    double r = std::sqrt(2.0 / g);
    double mass = 0.0;
    int n = 40000;
    for (int i = 0; i < n; ++i) {
      double x = -r + 2.0 * r * (i + 0.5) / n;
      mass += semicircle_density_normalized(x, g) * 2.0 * r / n;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(semicircle_cdf(-r, g) == doctest::Approx(0.0));
    CHECK(semicircle_cdf(0.0, g) == doctest::Approx(0.5));
    CHECK(semicircle_cdf(r, g) == doctest::Approx(1.0));
    // derivative of the CDF = density at a midpoint
    double x = 0.3 * r, d = 1e-6;
    double fd = (semicircle_cdf(x + d, g) - semicircle_cdf(x - d, g)) / (2.0 * d);
    CHECK(fd == doctest::Approx(semicircle_density_normalized(x, g)).epsilon(1e-5));
  }
}

TEST_CASE("inverse-CDF samples pass the KS self-test") {
  // M independent draws from the exact law: KS ~ O(1/sqrt(M))
  double g = 2.0;
  double r = std::sqrt(2.0 / g);
  Rng rng(77);
  int m = 20000;
  std::vector<double> vals;
  vals.reserve(m);
  for (int k = 0; k < m; ++k) {
    double u = rng.uniform();
    double lo = -r, hi = r;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      (semicircle_cdf(mid, g) < u ? lo : hi) = mid;
    }
    vals.push_back(0.5 * (lo + hi));
  }
  double ks = ks_statistic(vals, g);
  CHECK(ks <= 1.5 / std::sqrt(static_cast<double>(m)) + 0.005);
}

TEST_CASE("uniform samples fail the KS test") {
  double g = 2.0;
  double r = std::sqrt(2.0 / g);
  Rng rng(3);
  std::vector<double> vals;
  for (int k = 0; k < 15000; ++k) vals.push_back(rng.uniform(-r, r));
  CHECK(ks_statistic(vals, g) >= 0.05);
}

TEST_CASE("KS requires a minimum sample size") {
  std::vector<double> tiny(100, 0.0);
  CHECK_THROWS_AS(ks_statistic(tiny, 1.0), TooFewSamples);
}

TEST_CASE("gas sampling is deterministic for a fixed seed") {
  GasConfig cfg;
  cfg.n_particles = 8;
  cfg.g = 2.0;
  cfg.sweeps = 50;
  cfg.burn_in = 50;
  cfg.rng_seed = 42;
  GasSamples a = sample_gas(cfg);
  GasSamples b = sample_gas(cfg);
  REQUIRE(a.positions.size() == b.positions.size());
  for (std::size_t i = 0; i < a.positions.size(); ++i)
    CHECK(a.positions[i] == b.positions[i]);
  CHECK(a.acceptance_rate == b.acceptance_rate);
}

TEST_CASE("gas chain is symmetric in distribution and concentrated") {
  GasConfig cfg;
  cfg.n_particles = 16;
  cfg.g = 2.0;
  cfg.sweeps = 2000;
  cfg.burn_in = 500;
  cfg.rng_seed = 11;
  GasSamples s = sample_gas(cfg);
  CHECK_FALSE(s.acceptance_flagged);
  double mean = 0.0, peak = 0.0;
  for (double x : s.positions) {
    mean += x;
    peak = std::max(peak, std::abs(x));
  }
  mean /= static_cast<double>(s.positions.size());
  // even potential: the law is symmetric, the pooled mean is ~0
  CHECK(std::abs(mean) < 0.05);
  // support stays near the equilibrium radius sqrt(2/g) = 1
  CHECK(peak < 1.6);
  CHECK(peak > 0.7);
}

TEST_CASE("pooled gas samples approach the semicircle") {
  GasConfig cfg;
  cfg.n_particles = 32;
  cfg.g = 2.0;
  cfg.sweeps = 1500;
  cfg.burn_in = 400;
  cfg.rng_seed = 5;
  GasSamples s = sample_gas(cfg);
  double ks = histogram_compare(s, cfg.g);
  CHECK(ks <= 0.08);
}

TEST_CASE("three-state Metropolis chain matches its transition matrix") {
  // independent oracle for the Metropolis rule itself: a 3-state target
  // pi = (0.5, 0.3, 0.2) with uniform proposals among the other two states.
  // The empirical occupancy of a long chain driven by the same Rng primitive
  // must match the stationary law of the exact transition matrix.
  const double pi3[3] = {0.5, 0.3, 0.2};
  // exact transition matrix: propose one of the other two states with prob
  // 1/2 each, accept with min(1, pi_j / pi_i)
  double P[3][3] = {{0.0}};
  for (int i = 0; i < 3; ++i) {
    double stay = 0.0;
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      double acc = std::min(1.0, pi3[j] / pi3[i]);
      P[i][j] = 0.5 * acc;
      stay += 0.5 * (1.0 - acc);
    }
    P[i][i] = stay;
  }
  // stationary distribution by matrix power
  double v[3] = {1.0, 0.0, 0.0}, w[3];
  for (int it = 0; it < 200; ++it) {
    for (int j = 0; j < 3; ++j) {
      w[j] = 0.0;
      for (int i = 0; i < 3; ++i) w[j] += v[i] * P[i][j];
    }
    std::copy(w, w + 3, v);
  }
  for (int j = 0; j < 3; ++j) CHECK(v[j] == doctest::Approx(pi3[j]).epsilon(1e-10));

  // chain driven by the shared Rng
  Rng rng(123);
  int state = 0;
  long counts[3] = {0, 0, 0};
  int steps = 200000;
  for (int k = 0; k < steps; ++k) {
    int prop = (state + 1 + static_cast<int>(rng.below(2))) % 3;
    if (rng.uniform() < std::min(1.0, pi3[prop] / pi3[state])) state = prop;
    ++counts[state];
  }
  for (int j = 0; j < 3; ++j)
    CHECK(static_cast<double>(counts[j]) / steps == doctest::Approx(pi3[j]).epsilon(0.03));
}

TEST_CASE("1D relation check validates a converged point-target solve") {
  SolverConfig cfg;
  cfg.dim = 1;
  int n = 101;
  double h = 5.0 / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) cfg.candidate_coords.push_back(-2.5 + i * h);
  cfg.cell_spacing = {h};
  DiscreteMeasure rho0({{0.0}}, {1.0});
  EquilibriumResult res = minimize(rho0, cfg);
  OneDRelationReport rep = one_d_relation_check(res);
  CHECK(rep.pass);
  CHECK(rep.max_dev <= 1e-5);
  CHECK(rep.lambda == doctest::Approx(1.0).epsilon(0.02));

  // negative control: sabotage the weights
  std::vector<Point> pts;
  std::vector<double> w;
  for (std::size_t i = 0; i < res.measure.size(); ++i) {
    pts.push_back({res.measure.point(i)[0]});
    w.push_back(res.measure.weight(i));
  }
  w[20] += 0.3;
  EquilibriumResult bad = res;
  bad.measure = DiscreteMeasure(pts, w);
  bad.plan = solve_exact(bad.measure, rho0);
  bad.potential_at_atoms.clear();
  OneDRelationReport rep_bad = one_d_relation_check(bad);
  CHECK_FALSE(rep_bad.pass);

  // wrong dimension and wrong target are rejected
  SolverConfig cfg2 = cfg;
  cfg2.dim = 2;
  cfg2.candidate_coords.clear();
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      cfg2.candidate_coords.push_back(-1.0 + 0.5 * i);
      cfg2.candidate_coords.push_back(-1.0 + 0.5 * j);
    }
  cfg2.cell_spacing = {0.5, 0.5};
  DiscreteMeasure rho0_2d({{0.0, 0.0}}, {1.0});
  EquilibriumResult res2 = minimize(rho0_2d, cfg2);
  CHECK_THROWS_AS(one_d_relation_check(res2), WrongDimension);

  DiscreteMeasure rho0_two({{0.0}, {1.0}}, {0.5, 0.5});
  EquilibriumResult res3 = minimize(rho0_two, cfg);
  CHECK_THROWS_AS(one_d_relation_check(res3), WrongTarget);
}
