#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "eqm/energy.hpp"
#include "eqm/kernel.hpp"
#include "eqm/measure.hpp"
#include "eqm/transport.hpp"

namespace eqm {

struct SolverConfig {
  std::vector<double> candidate_coords;  // flat, n_candidates * dim
  int dim = 1;
  int max_outer = 20;
  int max_inner = 400;
  bool backtracking = true;  // Armijo line search; fixed eta otherwise
  double eta = 0.5;
  double armijo = 1e-4;
  double tol_el = 1e-6;
  std::vector<double> confinement_schedule;  // nonincreasing radii
  std::uint64_t rng_seed = 0;
  bool polish = true;  // active-set KKT refinement after descent
  bool interaction_enabled = true;  // test hook: transport-only objective
  KernelSpec kernel = KernelSpec::log2d();

  // Candidates represent cells of an absolutely continuous density, so the
  // interaction matrix carries the exact kernel cell-average on its diagonal
  // (this also makes the objective convex; without it mass collapse is the
  // discrete minimum). cell_spacing empty means: infer a cubic cell from the
  // smallest pairwise candidate distance. Set cell_quadrature=false for a
  // purely atomic reading with zero diagonal.
  bool cell_quadrature = true;
  std::vector<double> cell_spacing;

  std::size_t n_candidates() const {
    return candidate_coords.size() / static_cast<std::size_t>(dim);
  }
};

struct ElReport {
  double lambda_hat = 0.0;
  double max_support_dev = 0.0;  // max |2U + |x-T(x)|^2/2 - lambda| on support
  double support_stddev = 0.0;
  double min_mon_value = 0.0;    // min of the eq-(mon) expression over probes
  int mon_violations = 0;        // values below -tol_el
  int probes = 0;
};

struct EquilibriumResult {
  DiscreteMeasure measure;
  EnergyBreakdown energy;
  double lambda_hat = 0.0;
  std::vector<char> support_mask;
  ElReport el_report;
  TransportPlan plan;
  bool max_iters_reached = false;
  std::optional<double> confinement_radius;
  std::vector<double> energy_history;  // accepted descent energies (nonincreasing)
  // U at every candidate under the same quadrature convention as the solve
  // (includes the self-cell term when cell_quadrature was on)
  std::vector<double> potential_at_atoms;
};

EquilibriumResult minimize(const DiscreteMeasure& rho0, const SolverConfig& cfg);

// probe_potentials, when supplied, gives U at each probe under the solve's
// quadrature convention; otherwise the skip-singular particle potential is
// used.
ElReport el_residual(const EquilibriumResult& res, const std::vector<Point>& probe_points,
                     int pair_samples = 10000, std::uint64_t rng_seed = 7,
                     const std::vector<double>& probe_potentials = {});

EquilibriumResult confinement_loop(const DiscreteMeasure& rho0, const SolverConfig& cfg);

// Euclidean projection onto the probability simplex.
void project_simplex(std::vector<double>& w);

// ---- radially symmetric specialization -----------------------------------
//
// For radially symmetric rho0 in 2D the minimizer is radial; representing rho
// by uniform circular shells makes the interaction kernel exact,
//   I = sum_{ij} w_i w_j log(1/max(r_i, r_j))   (diagonal included),
// and the transport term a 1D monotone coupling of radial quantiles.

struct RadialConfig {
  std::vector<double> shell_radii;        // increasing, > 0
  std::vector<double> target_radii;       // radial profile of rho0
  std::vector<double> target_weights;
  int max_iters = 600;
  double tol = 1e-10;
  bool polish = true;
};

struct RadialEquilibrium {
  std::vector<double> radii;
  std::vector<double> weights;
  double interaction = 0.0;
  double transport = 0.0;
  double lambda_hat = 0.0;
  double kkt_residual = 0.0;  // max |2U(r_i) + alpha_i - lambda| on support
};

RadialEquilibrium minimize_radial(const RadialConfig& cfg);

// Shell potential U(r) = sum_k w_k log(1/max(r, r_k)) evaluated exactly.
double radial_potential(const std::vector<double>& radii, const std::vector<double>& weights,
                        double r);

// Deposit a shell profile as a smooth radial density on a 2D grid.
GridDensity radial_density_to_grid(const std::vector<double>& radii,
                                   const std::vector<double>& weights, const Point& origin,
                                   const std::vector<double>& spacing,
                                   const std::vector<std::size_t>& shape);

// Exact radial potential sampled at 2D cell centers (values + analytic grad).
PotentialField radial_potential_on_grid(const std::vector<double>& radii,
                                        const std::vector<double>& weights, const Point& origin,
                                        const std::vector<double>& spacing,
                                        const std::vector<std::size_t>& shape);

// Cost and source-side duals of the 1D monotone (quantile) coupling between
// radial profiles, ground cost (r-s)^2/2.
struct RadialTransport {
  double cost = 0.0;
  std::vector<double> dual_source;
};

RadialTransport radial_quantile_transport(const std::vector<double>& r,
                                          const std::vector<double>& w,
                                          const std::vector<double>& s,
                                          const std::vector<double>& v);

}  // namespace eqm
