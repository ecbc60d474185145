#pragma once

#include <utility>
#include <vector>

#include "eqm/kernel.hpp"
#include "eqm/measure.hpp"

namespace eqm {

// Explicit conservative upwind discretization of rho_t = div(rho grad U^rho).
// The advecting velocity is v = -tau * grad U^rho; tau is the free time-scale
// constant of the limit equation (default 1).
struct FlowState {
  GridDensity density;
  double time = 0.0;
  double dt = 0.0;
  int step_count = 0;
  double tau = 1.0;
  std::vector<std::pair<double, double>> energy_history;  // (time, I[rho])
  std::vector<double> dissipation_history;  // -2 tau int rho |grad U|^2 at step start
};

// Seeds the history with the initial interaction energy.
FlowState flow_init(GridDensity rho, double dt, double tau = 1.0);

// Largest stable step for the current state (0.4 h / max face speed).
double flow_dt_max(const FlowState& state);

// One explicit step; mass is conserved to float round-off by telescoping
// fluxes, zero-flux boundary. Throws CflViolation when state.dt exceeds the
// stability bound and NegativeDensity if upwinding still undershoots.
FlowState flow_step(const FlowState& state);

struct DissipationReport {
  double max_rel_mismatch = 0.0;  // |dI/dt - predicted| / |predicted|
  double max_energy_increase = 0.0;  // most positive per-step delta I
  int steps = 0;
  bool pass = false;
};

// Compares per-step energy decrements against the quadrature of the
// dissipation identity dI/dt = -2 tau int rho |grad U|^2.
DissipationReport dissipation_check(const FlowState& state, double rel_tol = 0.1);

// Interaction energy consistent with the grid quadrature (cell-averaged
// self-cell kernel), computed from the same field the step uses.
double flow_energy(const GridDensity& rho);

// Max over mirror cell pairs of |rho(x) - rho(-x)| relative to the peak;
// diagnostic for symmetry preservation on centered grids.
double mirror_asymmetry(const GridDensity& rho);

}  // namespace eqm
