#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "eqm/errors.hpp"

namespace eqm {

using Point = std::vector<double>;

struct Ball {
  Point center;
  double radius = 0.0;

  Ball(Point c, double r);
  bool contains(std::span<const double> x) const;
};

// Weighted point cloud on R^n. Weights are renormalized to sum to one at
// construction; instances are immutable afterwards.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::vector<Point> points, std::vector<double> weights);
  // Flat layout: coords.size() == n_atoms * dim.
  DiscreteMeasure(std::vector<double> coords, std::vector<double> weights, int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& coords() const { return coords_; }

  DiscreteMeasure translated(const Point& v) const;

  // Largest pairwise coordinate extent; 0 for a single atom.
  double bbox_diameter() const;

 private:
  void validate_and_normalize();

  std::vector<double> coords_;
  std::vector<double> weights_;
  int dim_ = 0;
};

DiscreteMeasure new_discrete(std::vector<Point> points, std::vector<double> weights);

double second_moment(const DiscreteMeasure& mu);

// Normalized restriction of Prop-3.1 type: keeps atoms inside the closed ball
// and renormalizes. Second value is the retained mass mu(B).
std::pair<DiscreteMeasure, double> restrict_normalize(const DiscreteMeasure& mu, const Ball& b);

// Uniform-grid density. Cell values are mass per unit volume; total mass is
// normalized to one at construction.
class GridDensity {
 public:
  GridDensity(Point origin, std::vector<double> spacing, std::vector<std::size_t> shape,
              std::vector<double> cells, bool normalize = true);

  int dim() const { return static_cast<int>(shape_.size()); }
  const Point& origin() const { return origin_; }
  const std::vector<double>& spacing() const { return spacing_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<double>& cells() const { return cells_; }
  std::size_t n_cells() const { return cells_.size(); }
  double cell_volume() const;
  double mass() const;

  double operator[](std::size_t flat) const { return cells_[flat]; }

  // Cell-center coordinate along one axis.
  double center(int axis, std::size_t index) const {
    return origin_[axis] + spacing_[axis] * (static_cast<double>(index) + 0.5);
  }
  std::size_t flat_index(std::span<const std::size_t> idx) const;

  // Mutable access for flow stepping; callers must preserve invariants.
  std::vector<double>& mutable_cells() { return cells_; }

 private:
  Point origin_;
  std::vector<double> spacing_;
  std::vector<std::size_t> shape_;
  std::vector<double> cells_;
};

// Nearest-cell mass deposition; throws OutOfGrid for atoms outside the box.
GridDensity grid_from_particles(const DiscreteMeasure& mu, const Point& origin,
                                const std::vector<double>& spacing,
                                const std::vector<std::size_t>& shape);

}  // namespace eqm
