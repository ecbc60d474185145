#include "eqm/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

namespace eqm {

Ball::Ball(Point c, double r) : center(std::move(c)), radius(r) {
  if (!(radius > 0.0)) throw Error("Ball: radius must be positive");
}

bool Ball::contains(std::span<const double> x) const {
  if (x.size() != center.size()) throw DimensionMismatch();
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double d = x[k] - center[k];
    d2 += d * d;
  }
  return d2 <= radius * radius;
}

DiscreteMeasure::DiscreteMeasure(std::vector<Point> points, std::vector<double> weights)
    : weights_(std::move(weights)) {
  if (points.empty()) throw EmptyMeasure();
  dim_ = static_cast<int>(points[0].size());
  coords_.reserve(points.size() * points[0].size());
  for (const auto& p : points) {
    if (static_cast<int>(p.size()) != dim_) throw DimensionMismatch();
    coords_.insert(coords_.end(), p.begin(), p.end());
  }
  validate_and_normalize();
}

DiscreteMeasure::DiscreteMeasure(std::vector<double> coords, std::vector<double> weights, int dim)
    : coords_(std::move(coords)), weights_(std::move(weights)), dim_(dim) {
  if (dim_ < 1) throw DimensionMismatch("dim must be >= 1");
  validate_and_normalize();
}

void DiscreteMeasure::validate_and_normalize() {
  if (weights_.empty()) throw EmptyMeasure();
  if (coords_.size() != weights_.size() * static_cast<std::size_t>(dim_))
    throw DimensionMismatch("coords/weights length mismatch");
  double total = 0.0;
  for (double w : weights_) {
    if (w < 0.0) throw NegativeWeight();
    total += w;
  }
  if (!(total > 0.0)) throw EmptyMeasure("total weight must be positive");
  for (double& w : weights_) w /= total;
}

DiscreteMeasure DiscreteMeasure::translated(const Point& v) const {
  if (static_cast<int>(v.size()) != dim_) throw DimensionMismatch();
  std::vector<double> c = coords_;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += v[i % v.size()];
  return DiscreteMeasure(std::move(c), weights_, dim_);
}

double DiscreteMeasure::bbox_diameter() const {
  double d2 = 0.0;
  for (int k = 0; k < dim_; ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < size(); ++i) {
      double x = coords_[i * dim_ + k];
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    d2 += (hi - lo) * (hi - lo);
  }
  return std::sqrt(d2);
}

DiscreteMeasure new_discrete(std::vector<Point> points, std::vector<double> weights) {
  return DiscreteMeasure(std::move(points), std::move(weights));
}

double second_moment(const DiscreteMeasure& mu) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double r2 = 0.0;
    for (double x : mu.point(i)) r2 += x * x;
    s += mu.weight(i) * r2;
  }
  return s;
}

std::pair<DiscreteMeasure, double> restrict_normalize(const DiscreteMeasure& mu, const Ball& b) {
  std::vector<double> coords;
  std::vector<double> weights;
  double mass = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto p = mu.point(i);
    if (b.contains(p)) {
      coords.insert(coords.end(), p.begin(), p.end());
      weights.push_back(mu.weight(i));
      mass += mu.weight(i);
    }
  }
  if (weights.empty() || !(mass > 0.0)) throw EmptyRestriction();
  return {DiscreteMeasure(std::move(coords), std::move(weights), mu.dim()), mass};
}

GridDensity::GridDensity(Point origin, std::vector<double> spacing, std::vector<std::size_t> shape,
                         std::vector<double> cells, bool normalize)
    : origin_(std::move(origin)), spacing_(std::move(spacing)), shape_(std::move(shape)),
      cells_(std::move(cells)) {
  int n = static_cast<int>(shape_.size());
  if (n < 1 || n > 3) throw DimensionMismatch("grid dim must be 1..3");
  if (origin_.size() != shape_.size() || spacing_.size() != shape_.size())
    throw DimensionMismatch();
  for (double h : spacing_)
    if (!(h > 0.0)) throw Error("GridDensity: spacing must be positive");
  std::size_t expect = 1;
  for (std::size_t s : shape_) expect *= s;
  if (cells_.size() != expect) throw DimensionMismatch("cell array size mismatch");
  double total = 0.0;
  for (double c : cells_) {
    if (c < 0.0) throw NegativeDensity();
    total += c;
  }
  if (normalize) {
    total *= cell_volume();
    if (!(total > 0.0)) throw EmptyMeasure("grid density has zero mass");
    for (double& c : cells_) c /= total;
  }
}

double GridDensity::cell_volume() const {
  double v = 1.0;
  for (double h : spacing_) v *= h;
  return v;
}

double GridDensity::mass() const {
  double s = 0.0;
  for (double c : cells_) s += c;
  return s * cell_volume();
}

std::size_t GridDensity::flat_index(std::span<const std::size_t> idx) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    if (idx[k] >= shape_[k]) throw OutOfGrid();
    flat = flat * shape_[k] + idx[k];
  }
  return flat;
}

GridDensity grid_from_particles(const DiscreteMeasure& mu, const Point& origin,
                                const std::vector<double>& spacing,
                                const std::vector<std::size_t>& shape) {
  if (static_cast<std::size_t>(mu.dim()) != shape.size()) throw DimensionMismatch();
  std::size_t n_cells = 1;
  for (std::size_t s : shape) n_cells *= s;
  std::vector<double> cells(n_cells, 0.0);
  double vol = 1.0;
  for (double h : spacing) vol *= h;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto p = mu.point(i);
    std::size_t flat = 0;
    for (std::size_t k = 0; k < shape.size(); ++k) {
      double t = (p[k] - origin[k]) / spacing[k];
      if (t < 0.0 || t >= static_cast<double>(shape[k])) throw OutOfGrid();
      flat = flat * shape[k] + static_cast<std::size_t>(t);
    }
    cells[flat] += mu.weight(i) / vol;
  }
  return GridDensity(origin, spacing, shape, std::move(cells), /*normalize=*/false);
}

}  // namespace eqm
