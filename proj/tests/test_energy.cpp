#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "eqm/energy.hpp"
#include "eqm/rng.hpp"
#include "eqm/transport.hpp"

using namespace eqm;

namespace {
constexpr double kPi = 3.14159265358979323846;

DiscreteMeasure uniform_disk(int n, std::uint64_t seed, double radius = 1.0) {
  Rng rng(seed);
  std::vector<Point> pts;
  std::vector<double> w(n, 1.0);
  for (int i = 0; i < n; ++i) {
    double r = radius * std::sqrt(rng.uniform());
    double th = 2.0 * kPi * rng.uniform();
    pts.push_back({r * std::cos(th), r * std::sin(th)});
  }
  return DiscreteMeasure(std::move(pts), std::move(w));
}

}  // namespace

TEST_CASE("interaction energy excludes the diagonal") {
  // two atoms at distance 1: I = 2 * w1 w2 * log(1/1) = 0
  DiscreteMeasure two({{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5});
  CHECK(interaction_energy(two, KernelSpec::log2d()) == doctest::Approx(0.0));

  // distance e^{-1}: I = 2 * 0.25 * 1 = 0.5
  DiscreteMeasure close({{0.0, 0.0}, {std::exp(-1.0), 0.0}}, {0.5, 0.5});
  CHECK(interaction_energy(close, KernelSpec::log2d()) == doctest::Approx(0.5));

  // single atom: no off-diagonal pairs to sum over
  DiscreteMeasure one({{0.0, 0.0}}, {1.0});
  CHECK_THROWS_AS(interaction_energy(one, KernelSpec::log2d()), TooFewAtoms);
}

TEST_CASE("uniform unit disk particle energy approaches 1/4") {
  DiscreteMeasure mu = uniform_disk(4096, 42);
  double I = interaction_energy(mu, KernelSpec::log2d());
  CHECK(I == doctest::Approx(0.25).epsilon(0.08));
}

TEST_CASE("interaction energy is translation invariant") {
  DiscreteMeasure mu = uniform_disk(200, 3);
  DiscreteMeasure shifted = mu.translated({7.0, -2.0});
  CHECK(interaction_energy(mu, KernelSpec::log2d()) ==
        doctest::Approx(interaction_energy(shifted, KernelSpec::log2d())).epsilon(1e-12));
}

TEST_CASE("grid interaction energy of the uniform unit disk") {
  std::size_t n = 128;
  double h = 3.0 / static_cast<double>(n);
  std::vector<double> cells(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double x = -1.5 + h * (i + 0.5), y = -1.5 + h * (j + 0.5);
      if (x * x + y * y <= 1.0) cells[i * n + j] = 1.0;
    }
  GridDensity rho({-1.5, -1.5}, {h, h}, {n, n}, std::move(cells));
  CHECK(interaction_energy_grid(rho, KernelSpec::log2d()) == doctest::Approx(0.25).epsilon(0.01));
}

TEST_CASE("total energy splits into interaction plus transport") {
  DiscreteMeasure mu({{0.0, 0.0}, {std::exp(-1.0), 0.0}}, {0.5, 0.5});
  DiscreteMeasure rho0({{2.0, 0.0}}, {1.0});
  EnergyBreakdown e = total_energy(mu, rho0, KernelSpec::log2d());
  CHECK(e.interaction == doctest::Approx(0.5));
  double d2 = wasserstein_d2(mu, rho0);
  CHECK(e.transport == doctest::Approx(d2).epsilon(1e-10));
  CHECK(e.total == doctest::Approx(e.interaction + e.transport));
}

TEST_CASE("translating the candidate adds the transport penalty only") {
  // J[mu + v] - J[mu] depends only on the transport term; with rho0 a point
  // mass at the centroid of mu, moving mu by v costs about |v|^2 / 2 extra.
  DiscreteMeasure mu = uniform_disk(64, 8);
  // centroid
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    cx += mu.weight(i) * mu.point(i)[0];
    cy += mu.weight(i) * mu.point(i)[1];
  }
  DiscreteMeasure rho0({{cx, cy}}, {1.0});
  EnergyBreakdown base = total_energy(mu, rho0, KernelSpec::log2d());
  Point v{1.5, -2.0};
  EnergyBreakdown moved = total_energy(mu.translated(v), rho0, KernelSpec::log2d());
  CHECK(moved.interaction == doctest::Approx(base.interaction).epsilon(1e-12));
  // transport to a point mass: d^2 = second moment about the point, so the
  // increment is exactly |v|^2/2 when rho0 sits at the centroid
  double v2 = 0.5 * (v[0] * v[0] + v[1] * v[1]);
  CHECK(moved.transport - base.transport == doctest::Approx(v2).epsilon(1e-9));
}

TEST_CASE("confined energy of semicircle samples") {
  // F[rho] = -I[rho] + g * m2. For atoms at +-1/2 with equal weights:
  // -I = -2*(1/4)*log(1/1) = 0 and m2 = 1/4.
  DiscreteMeasure mu({{-0.5}, {0.5}}, {0.5, 0.5});
  CHECK(confined_energy(mu, 2.0) == doctest::Approx(2.0 * 0.25));
  CHECK(confined_energy(mu, 0.0) == doctest::Approx(0.0));

  // attractive log term sign: atoms at distance e^{-1} contribute
  // 2 * w^2 * log(e^{-1}) = -0.5 to the first term
  DiscreteMeasure close({{0.0}, {std::exp(-1.0)}}, {0.5, 0.5});
  double m2 = second_moment(close);
  CHECK(confined_energy(close, 1.0) == doctest::Approx(-0.5 + m2));
}

TEST_CASE("momentum bound holds for optimizer-like pairs") {
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    DiscreteMeasure mu = uniform_disk(30, 100 + t);
    DiscreteMeasure rho0 = uniform_disk(25, 200 + t, 0.5);
    double r0_support = 0.5;
    auto rep = momentum_bound_check(mu, rho0, r0_support);
    CHECK(rep.pass);
    CHECK(rep.lhs <= rep.middle + 1e-12);
    CHECK(rep.middle <= rep.rhs + 1e-12);
    CHECK(rep.slack >= -1e-12);
  }
}

TEST_CASE("restriction improvement drops a far outlier") {
  // almost all mass near the origin, a sliver far away: restricting to a
  // moderate ball must lower J against a point target at the origin.
  std::vector<Point> pts = {{0.3, 0.0}, {-0.3, 0.0}, {0.0, 0.35}, {50.0, 0.0}};
  DiscreteMeasure mu(pts, {0.33, 0.33, 0.33, 0.01});
  DiscreteMeasure rho0({{0.0, 0.0}}, {1.0});
  auto rep = restriction_improvement_check(mu, rho0, 5.0);
  CHECK_FALSE(rep.identical);
  CHECK(rep.improved);
  CHECK(rep.j_restricted < rep.j_full);
  CHECK(rep.retained_mass == doctest::Approx(0.99));
}

TEST_CASE("restriction is a no-op when the support already fits") {
  DiscreteMeasure mu({{0.1, 0.0}, {-0.2, 0.1}}, {0.5, 0.5});
  DiscreteMeasure rho0({{0.0, 0.0}}, {1.0});
  auto rep = restriction_improvement_check(mu, rho0, 10.0);
  CHECK(rep.identical);
  CHECK(rep.j_restricted == doctest::Approx(rep.j_full));
}
