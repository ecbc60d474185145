#pragma once

#include <cstdint>
#include <vector>

#include "eqm/measure.hpp"

namespace eqm {

// Squared-distance cost with the 1/2 convention: c(i,j) = |x_i - y_j|^2 / 2.
// Every downstream formula (EL residual, transport map, MA residual) relies
// on this factor.
std::vector<double> cost_matrix(const DiscreteMeasure& x, const DiscreteMeasure& y);

struct PlanEntry {
  int i = 0;
  int j = 0;
  double mass = 0.0;
};

struct TransportPlan {
  DiscreteMeasure source;
  DiscreteMeasure target;
  std::vector<PlanEntry> pairs;
  double cost = 0.0;
  std::vector<double> dual_source;  // alpha_i, alpha_i + beta_j <= c_ij
  std::vector<double> dual_target;  // beta_j
  bool entropic = false;

  double dual_objective() const;
  double duality_gap() const { return cost - dual_objective(); }
  // max L1 violation of the two marginal conditions
  double marginal_error() const;
  // barycentric image T(x_i); atoms without plan mass map to themselves
  std::vector<double> barycentric_targets() const;
};

inline constexpr std::size_t kExactSizeCap = 4000000;  // N*M entries

TransportPlan solve_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

TransportPlan solve_entropic(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps_reg,
                             int max_iters = 20000);

// d^2(mu, nu); exact below the size cap, entropic fallback above it
// (flagged through *used_entropic when provided).
double wasserstein_d2(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                      bool* used_entropic = nullptr);

struct KantorovichPotential {
  std::vector<double> values;  // on the query points
  Point base_point;            // psi(x0) = 0
};

// Extends the dual potential to arbitrary query points through the
// plan-support c-transform and normalizes psi(x0) = 0. The seed is the
// negated source dual, which realizes psi = 2 U^rho (up to a constant) on
// supp rho at an energy minimizer.
KantorovichPotential kantorovich_potential(const TransportPlan& plan,
                                           const std::vector<Point>& query, const Point& x0);

struct CyclicMonotonicityReport {
  int trials = 0;
  int violations = 0;
  double worst_margin = 0.0;  // most positive violation of eq (5.1)
};

CyclicMonotonicityReport check_cyclic_monotonicity(const TransportPlan& plan, int cycle_len,
                                                   int trials, std::uint64_t rng_seed);

}  // namespace eqm
