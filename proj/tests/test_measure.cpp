#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "eqm/measure.hpp"

using namespace eqm;

TEST_CASE("construction normalizes weights and validates input") {
  DiscreteMeasure mu({{0.0, 0.0}, {1.0, 0.0}}, {2.0, 6.0});
  CHECK(mu.size() == 2);
  CHECK(mu.weight(0) == doctest::Approx(0.25));
  CHECK(mu.weight(1) == doctest::Approx(0.75));
  CHECK(mu.dim() == 2);

  CHECK_THROWS_AS(DiscreteMeasure({{0.0}}, {-1.0}), NegativeWeight);
  CHECK_THROWS_AS(DiscreteMeasure(std::vector<Point>{}, {}), EmptyMeasure);
  CHECK_THROWS_AS(DiscreteMeasure({{0.0}, {1.0, 2.0}}, {0.5, 0.5}), DimensionMismatch);
}

TEST_CASE("second moment") {
  CHECK(second_moment(DiscreteMeasure({{0.0, 0.0}}, {1.0})) == 0.0);
  CHECK(second_moment(DiscreteMeasure({{1.0, 0.0}, {-1.0, 0.0}}, {0.5, 0.5})) ==
        doctest::Approx(1.0));
  CHECK(second_moment(DiscreteMeasure({{3.0, 4.0}}, {1.0})) == doctest::Approx(25.0));
}

TEST_CASE("restrict_normalize") {
  DiscreteMeasure mu({{0.0, 0.0}, {10.0, 0.0}}, {0.5, 0.5});
  auto [inside, mass] = restrict_normalize(mu, Ball({0.0, 0.0}, 1.0));
  CHECK(inside.size() == 1);
  CHECK(inside.weight(0) == doctest::Approx(1.0));
  CHECK(mass == doctest::Approx(0.5));

  auto [all, mass_all] = restrict_normalize(mu, Ball({0.0, 0.0}, 100.0));
  CHECK(all.size() == 2);
  CHECK(mass_all == doctest::Approx(1.0));

  CHECK_THROWS_AS(restrict_normalize(mu, Ball({50.0, 50.0}, 1.0)), EmptyRestriction);
}

TEST_CASE("restriction is idempotent and bounds the second moment") {
  DiscreteMeasure mu({{0.2, 0.1}, {0.9, 0.0}, {5.0, 5.0}}, {0.3, 0.3, 0.4});
  Ball b({0.0, 0.0}, 1.0);
  auto [r1, m1] = restrict_normalize(mu, b);
  auto [r2, m2] = restrict_normalize(r1, b);
  CHECK(r2.size() == r1.size());
  CHECK(m2 == doctest::Approx(1.0));
  CHECK(second_moment(r1) <= (b.radius + 0.0) * (b.radius + 0.0) + 1e-12);
}

TEST_CASE("ball contains its boundary") {
  Ball b({0.0}, 1.0);
  double edge[1] = {1.0};
  CHECK(b.contains(std::span<const double>(edge, 1)));
}

TEST_CASE("grid deposition") {
  Point origin{0.0, 0.0};
  std::vector<double> h{1.0, 1.0};
  std::vector<std::size_t> shape{4, 4};

  DiscreteMeasure one({{1.5, 2.5}}, {1.0});
  GridDensity g = grid_from_particles(one, origin, h, shape);
  CHECK(g.mass() == doctest::Approx(1.0));
  CHECK(g[1 * 4 + 2] == doctest::Approx(1.0));  // mass / cell volume
  double other = 0.0;
  for (std::size_t c = 0; c < g.n_cells(); ++c)
    if (c != 1 * 4 + 2) other += g[c];
  CHECK(other == 0.0);

  DiscreteMeasure two({{1.2, 2.2}, {1.8, 2.8}}, {0.5, 0.5});
  GridDensity g2 = grid_from_particles(two, origin, h, shape);
  CHECK(g2[1 * 4 + 2] == doctest::Approx(1.0));

  DiscreteMeasure out({{-1.0, 0.5}}, {1.0});
  CHECK_THROWS_AS(grid_from_particles(out, origin, h, shape), OutOfGrid);
}

TEST_CASE("grid mass conservation from many particles") {
  std::vector<Point> pts;
  std::vector<double> w;
  for (int i = 0; i < 500; ++i) {
    double t = static_cast<double>(i) / 499.0;
    pts.push_back({0.1 + 3.7 * t, 3.9 - 3.8 * t});
    w.push_back(1.0 + std::sin(7.0 * t));
  }
  DiscreteMeasure mu(pts, w);
  GridDensity g =
      grid_from_particles(mu, Point{0.0, 0.0}, {0.25, 0.25}, {16, 16});
  CHECK(std::abs(g.mass() - 1.0) <= 1e-10);
}

TEST_CASE("grid density normalization and indexing") {
  GridDensity g({0.0}, {0.5}, {4}, {1.0, 1.0, 1.0, 1.0});
  CHECK(g.mass() == doctest::Approx(1.0));
  CHECK(g.cell_volume() == doctest::Approx(0.5));
  CHECK(g.center(0, 0) == doctest::Approx(0.25));
  std::size_t idx[1] = {3};
  CHECK(g.flat_index(std::span<const std::size_t>(idx, 1)) == 3);
  CHECK_THROWS_AS(GridDensity({0.0}, {0.5}, {2}, {0.0, 0.0}), EmptyMeasure);
}

TEST_CASE("translation and diameter") {
  DiscreteMeasure mu({{0.0, 0.0}, {3.0, 4.0}}, {0.5, 0.5});
  CHECK(mu.bbox_diameter() == doctest::Approx(5.0));
  DiscreteMeasure shifted = mu.translated({1.0, -1.0});
  CHECK(shifted.point(1)[0] == doctest::Approx(4.0));
  CHECK(shifted.point(1)[1] == doctest::Approx(3.0));
  CHECK(shifted.bbox_diameter() == doctest::Approx(5.0));
}
