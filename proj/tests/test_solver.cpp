#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "eqm/rng.hpp"
#include "eqm/solver.hpp"

using namespace eqm;

namespace {

SolverConfig grid_config_1d(double lo, double hi, int n) {
  SolverConfig cfg;
  cfg.dim = 1;
  double h = (hi - lo) / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) cfg.candidate_coords.push_back(lo + i * h);
  cfg.cell_spacing = {h};
  return cfg;
}

}  // namespace

TEST_CASE("simplex projection") {
  std::vector<double> w = {0.2, 0.3, 0.5};
  project_simplex(w);
  CHECK(w[0] == doctest::Approx(0.2));
  CHECK(w[2] == doctest::Approx(0.5));

  std::vector<double> v = {1.0, 1.0};
  project_simplex(v);
  CHECK(v[0] == doctest::Approx(0.5));
  CHECK(v[1] == doctest::Approx(0.5));

  std::vector<double> neg = {-5.0, 0.0, 1.0};
  project_simplex(neg);
  CHECK(neg[0] == doctest::Approx(0.0));
  double s = std::accumulate(neg.begin(), neg.end(), 0.0);
  CHECK(s == doctest::Approx(1.0));
  CHECK(*std::min_element(neg.begin(), neg.end()) >= 0.0);

  // projection of an arbitrary vector: verify optimality by comparing against
  // a dense sweep over feasible perturbation directions
  std::vector<double> x = {0.9, -0.3, 0.45, 0.12, -0.8};
  std::vector<double> orig = x;
  project_simplex(x);
  double base = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) base += (x[i] - orig[i]) * (x[i] - orig[i]);
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> y(x.size());
    double sum = 0.0;
    for (auto& yi : y) {
      yi = rng.uniform();
      sum += yi;
    }
    double dist = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] /= sum;
      dist += (y[i] - orig[i]) * (y[i] - orig[i]);
    }
    CHECK(base <= dist + 1e-12);
  }
}

TEST_CASE("transport-only objective reproduces the target") {
  // with the interaction switched off, J = d^2(mu, rho0): the minimizer puts
  // all mass at the candidate nearest the single target atom
  SolverConfig cfg = grid_config_1d(-2.0, 2.0, 41);
  cfg.interaction_enabled = false;
  DiscreteMeasure rho0({{0.1}}, {1.0});
  EquilibriumResult res = minimize(rho0, cfg);
  // nearest candidate to 0.1 on the 0.1-spaced grid is 0.1 itself
  double mean = 0.0;
  for (std::size_t i = 0; i < res.measure.size(); ++i)
    mean += res.measure.weight(i) * res.measure.point(i)[0];
  CHECK(mean == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(res.energy.transport <= 1e-8);
}

TEST_CASE("1D equilibrium with a point target matches the continuum solution") {
  // continuum minimizer: semicircle on [-R, R] with R = 2, multiplier 1
  SolverConfig cfg = grid_config_1d(-2.5, 2.5, 101);
  DiscreteMeasure rho0({{0.0}}, {1.0});
  EquilibriumResult res = minimize(rho0, cfg);
  CHECK(res.lambda_hat == doctest::Approx(1.0).epsilon(0.02));
  CHECK(res.el_report.max_support_dev <= 1e-6);

  // support fills [-2, 2] but not the edges of the candidate box
  double lo = 1e9, hi = -1e9;
  int n_support = 0;
  for (std::size_t i = 0; i < res.measure.size(); ++i) {
    if (!res.support_mask[i]) continue;
    ++n_support;
    lo = std::min(lo, res.measure.point(i)[0]);
    hi = std::max(hi, res.measure.point(i)[0]);
  }
  CHECK(n_support > 60);
  CHECK(lo == doctest::Approx(-2.0).epsilon(0.06));
  CHECK(hi == doctest::Approx(2.0).epsilon(0.06));

  // symmetric problem, symmetric solution
  for (std::size_t i = 0; i < res.measure.size(); ++i) {
    std::size_t mirror = res.measure.size() - 1 - i;
    CHECK(res.measure.weight(i) == doctest::Approx(res.measure.weight(mirror)).epsilon(1e-4));
  }

  // accepted descent energies never increase
  for (std::size_t k = 1; k < res.energy_history.size(); ++k)
    CHECK(res.energy_history[k] <= res.energy_history[k - 1] + 1e-12);
}

TEST_CASE("stationarity residual flags a perturbed solution") {
  SolverConfig cfg = grid_config_1d(-2.5, 2.5, 61);
  DiscreteMeasure rho0({{0.0}}, {1.0});
  EquilibriumResult res = minimize(rho0, cfg);
  double clean = res.el_report.max_support_dev;

  // move 20% of the mass from one side to the other and re-score
  EquilibriumResult bad = res;
  std::vector<double> w;
  std::vector<Point> pts;
  for (std::size_t i = 0; i < res.measure.size(); ++i) {
    pts.push_back({res.measure.point(i)[0]});
    w.push_back(res.measure.weight(i));
  }
  w[10] += 0.2;
  bad.measure = DiscreteMeasure(pts, w);
  bad.plan = solve_exact(bad.measure, rho0);
  bad.potential_at_atoms.clear();  // potentials no longer valid for bad
  std::vector<Point> probes;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (res.support_mask[i]) probes.push_back(pts[i]);
  ElReport rep = el_residual(bad, probes, 2000, 5);
  CHECK(rep.max_support_dev > 10.0 * std::max(clean, 1e-8));
}

TEST_CASE("coarse brute force agrees on tiny candidate sets") {
  // 5 candidates, exhaustive search over the weight simplex on a fine lattice
  std::vector<double> coords = {-1.0, -0.5, 0.0, 0.5, 1.0};
  SolverConfig cfg;
  cfg.dim = 1;
  cfg.candidate_coords = coords;
  cfg.cell_spacing = {0.5};
  DiscreteMeasure rho0({{0.0}}, {1.0});
  EquilibriumResult res = minimize(rho0, cfg);

  // brute force on the lattice k/m
  KernelSpec spec = KernelSpec::log2d();
  double self = kernel_cell_average(spec, {0.5});
  auto objective = [&](const std::vector<double>& w) {
    double inter = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        double k =
            (i == j) ? self : kernel_eval(spec, std::abs(coords[i] - coords[j]));
        inter += w[i] * w[j] * k;
      }
    double tr = 0.0;  // point target: linear
    for (int i = 0; i < 5; ++i) tr += w[i] * 0.5 * coords[i] * coords[i];
    return inter + tr;
  };
  int m = 40;
  double best = 1e18;
  std::vector<double> w(5);
  for (int a = 0; a <= m; ++a)
    for (int b = 0; a + b <= m; ++b)
      for (int c = 0; a + b + c <= m; ++c)
        for (int d = 0; a + b + c + d <= m; ++d) {
          int e = m - a - b - c - d;
          w = {a / static_cast<double>(m), b / static_cast<double>(m),
               c / static_cast<double>(m), d / static_cast<double>(m),
               e / static_cast<double>(m)};
          best = std::min(best, objective(w));
        }
  CHECK(res.energy.total <= best + 1e-9);
}

TEST_CASE("confinement loop recovers the unconfined solution for benign data") {
  SolverConfig cfg = grid_config_1d(-2.5, 2.5, 41);
  cfg.confinement_schedule = {10.0, 5.0, 3.0};
  DiscreteMeasure rho0({{0.0}}, {1.0});
  EquilibriumResult plain = minimize(rho0, cfg);
  EquilibriumResult conf = confinement_loop(rho0, cfg);
  CHECK(conf.energy.total == doctest::Approx(plain.energy.total).epsilon(1e-6));
  CHECK(conf.confinement_radius.has_value());
}

TEST_CASE("degenerate candidate sets are rejected") {
  SolverConfig cfg;
  cfg.dim = 1;
  cfg.candidate_coords = {0.5, 0.5};
  DiscreteMeasure rho0({{0.0}}, {1.0});
  CHECK_THROWS_AS(minimize(rho0, cfg), DegenerateCandidates);
}

TEST_CASE("radial quantile transport matches the generic exact solver") {
  std::vector<double> r = {0.2, 0.7, 1.3};
  std::vector<double> w = {0.3, 0.5, 0.2};
  std::vector<double> s = {0.4, 1.0};
  std::vector<double> v = {0.6, 0.4};
  RadialTransport rt = radial_quantile_transport(r, w, s, v);
  DiscreteMeasure mu({{0.2}, {0.7}, {1.3}}, w);
  DiscreteMeasure nu({{0.4}, {1.0}}, v);
  TransportPlan plan = solve_exact(mu, nu);
  CHECK(rt.cost == doctest::Approx(plan.cost).epsilon(1e-10));
  // duals shift: compare pairwise differences
  for (int i = 0; i < 3; ++i)
    CHECK(rt.dual_source[i] - rt.dual_source[0] ==
          doctest::Approx(plan.dual_source[i] - plan.dual_source[0]).epsilon(1e-8));
}

TEST_CASE("shell potential closed form") {
  std::vector<double> r = {1.0};
  std::vector<double> w = {1.0};
  // inside a uniform shell the potential is constant log(1/R); outside log(1/r)
  CHECK(radial_potential(r, w, 0.3) == doctest::Approx(0.0));
  CHECK(radial_potential(r, w, 1.0) == doctest::Approx(0.0));
  CHECK(radial_potential(r, w, 2.0) == doctest::Approx(-std::log(2.0)));
}

TEST_CASE("radial minimizer: uniform disk target has a closed-form solution") {
  // For rho0 uniform on the unit disk the minimizer is uniform with density
  // 1/(4 pi) on the disk of radius 2: the monotone radial map satisfies both
  // mass balance T(r) = sqrt(M(r)) and stationarity T(r) = r - 2 M(r)/r,
  // which forces M(r) = r^2/4.
  int n = 80;
  double rmax = 2.2;
  RadialConfig rc;
  for (int i = 0; i < n; ++i)
    rc.shell_radii.push_back(rmax * (i + 0.5) / static_cast<double>(n));
  int tn = 60;
  for (int i = 0; i < tn; ++i) {
    double rr = (i + 0.5) / static_cast<double>(tn);
    rc.target_radii.push_back(rr);
    rc.target_weights.push_back(2.0 * rr / static_cast<double>(tn));
  }
  double ws = std::accumulate(rc.target_weights.begin(), rc.target_weights.end(), 0.0);
  for (auto& wv : rc.target_weights) wv /= ws;
  RadialEquilibrium eq = minimize_radial(rc);
  CHECK(eq.kkt_residual <= 1e-2);
  double mass = std::accumulate(eq.weights.begin(), eq.weights.end(), 0.0);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  // cumulative mass tracks M(r) = r^2/4 inside the support
  double acc = 0.0;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += eq.weights[i];
    double rr = rc.shell_radii[i] + 0.5 * rmax / n;
    double expect = std::min(1.0, rr * rr / 4.0);
    worst = std::max(worst, std::abs(acc - expect));
  }
  CHECK(worst <= 0.02);
}

TEST_CASE("radial profile deposits on a grid with unit mass and radial symmetry") {
  std::vector<double> r, w;
  int n = 40;
  for (int i = 0; i < n; ++i) {
    double rr = (i + 0.5) / static_cast<double>(n);
    r.push_back(rr);
    w.push_back(2.0 * rr / static_cast<double>(n));
  }
  double ws = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& wv : w) wv /= ws;
  std::size_t g = 96;
  double h = 3.0 / static_cast<double>(g);
  GridDensity rho = radial_density_to_grid(r, w, {-1.5, -1.5}, {h, h}, {g, g});
  CHECK(rho.mass() == doctest::Approx(1.0).epsilon(1e-6));
  // symmetry under x -> -x
  double worst = 0.0;
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < g; ++j)
      worst = std::max(worst, std::abs(rho[i * g + j] - rho[(g - 1 - i) * g + j]));
  CHECK(worst <= 1e-10);

  // potential field values match the scalar closed form
  PotentialField f = radial_potential_on_grid(r, w, {-1.5, -1.5}, {h, h}, {g, g});
  std::size_t idx[2] = {10, 70};
  double x = -1.5 + h * (10 + 0.5), y = -1.5 + h * (70 + 0.5);
  CHECK(f.value_at(std::span<const std::size_t>(idx, 2)) ==
        doctest::Approx(radial_potential(r, w, std::hypot(x, y))).epsilon(1e-10));
}
