#pragma once

#include <string>
#include <utility>
#include <vector>

#include "eqm/kernel.hpp"
#include "eqm/measure.hpp"
#include "eqm/solver.hpp"
#include "eqm/transport.hpp"

namespace eqm {

// Multilinear interpolation in a cell-centered field; clamped at the border.
double field_value_at(const PotentialField& f, std::span<const double> x);
std::vector<double> field_gradient_at(const PotentialField& f, std::span<const double> x);

struct ComplementarityReport {
  double max_weighted = 0.0;   // max over support of w_i |2U - psi - c_shift|
  double c_shift = 0.0;        // median over support of 2U - psi
  double off_support_min = 0.0;  // min over zero-weight atoms of 2U - psi - c_shift
  bool off_support_ok = true;
};

// Obstacle-problem complementarity against the dual potential. The obstacle is
// realized by twice the potential (psi = 2 U^rho on the contact set, up to the
// base-point constant absorbed in c_shift); psi.values must be aligned with
// the atoms of res.measure.
ComplementarityReport complementarity_report(const EquilibriumResult& res,
                                             const KantorovichPotential& psi,
                                             double off_tol = 1e-6);

// Max over support atoms of |T(x) - x - 2 grad U(x)|, T barycentric from the
// plan. The default uses the skip-singular particle gradient; the field
// overload interpolates a precomputed grid gradient.
double transport_map_residual(const EquilibriumResult& res,
                              const KernelSpec& spec = KernelSpec::log2d());
double transport_map_residual(const EquilibriumResult& res, const PotentialField& u_field);

struct MaStats {
  double median = 0.0;  // |det(I + 2 D^2 U) rho0(T x) - rho(x)|
  double p90 = 0.0;
  double alt_median = 0.0;  // shifted-determinant form, scaled back by rho0(T x)
  double alt_p90 = 0.0;
  double agreement = 0.0;  // |median - alt_median| / max(median, alt_median)
  int interior_cells = 0;
  int excluded = 0;  // cells where rho0 vanishes at the mapped point
};

// Nonlocal Monge-Ampere residual of a 2D grid solution. u_field holds U and
// its gradient on the same grid as rho; second derivatives are centered
// differences. Cells are "interior support" when rho exceeds support_cut and
// all 8 neighbours exist.
MaStats monge_ampere_residual(const PotentialField& u_field, const GridDensity& rho,
                              const GridDensity& rho0, double support_cut);

// Minimal width over sampled directions of the points inside the closed ball.
double slab_width(const std::vector<Point>& points, const Ball& b);

// omega(R) = sup_{r <= R, centers} slab_width(points in B_r(c)) / r over an
// 8-level geometric ladder in r; nondecreasing in R by construction.
std::vector<std::pair<double, double>> omega_of_R(const std::vector<Point>& points,
                                                  const std::vector<Point>& centers,
                                                  std::vector<double> r_list);

// Advisory labeling of candidate singular free-boundary atoms: fixed points of
// T with small gradient and small local density ratio. Thresholds are declared
// proxies at resolution h; never a pass/fail signal.
std::vector<std::size_t> singular_point_labels(const EquilibriumResult& res, double h,
                                               const KernelSpec& spec = KernelSpec::log2d());

struct DiagnosticsReport {
  double complementarity_max = 0.0;
  double map_residual_max = 0.0;
  MaStats ma_residual_stats;
  std::vector<std::pair<double, double>> omega_table;
  std::vector<std::pair<std::string, bool>> flags;
};

}  // namespace eqm
