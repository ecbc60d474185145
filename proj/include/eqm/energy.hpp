#pragma once

#include <optional>

#include "eqm/kernel.hpp"
#include "eqm/measure.hpp"

namespace eqm {

struct EnergyBreakdown {
  double interaction = 0.0;  // I[rho]
  double transport = 0.0;    // d^2(rho, rho0)
  double total = 0.0;        // J = interaction + transport
  std::optional<double> confinement;
};

// Off-diagonal double sum sum_{i != j} w_i w_j K(x_i - x_j). The diagonal is
// excluded: atoms are quadrature for an absolutely continuous rho, for which
// the diagonal carries no mass.
double interaction_energy(const DiscreteMeasure& mu, const KernelSpec& spec);

// Quadrature form on a grid density; the singular cell uses the exact cell
// average of the kernel, so this is consistent with the Fourier-side energy.
double interaction_energy_grid(const GridDensity& rho, const KernelSpec& spec);

EnergyBreakdown total_energy(const DiscreteMeasure& mu, const DiscreteMeasure& rho0,
                             const KernelSpec& spec);

// F[rho] = +iint log|x-y| drho drho + g int |x|^2 drho  (the attractive-sign
// confined energy; equals -I[rho] + g * second moment).
double confined_energy(const DiscreteMeasure& mu, double g);

struct MomentumBoundReport {
  double lhs = 0.0;          // int |x|^2 dmu
  double middle = 0.0;       // 4 d^2 + 14 int |y|^2 dmu0
  double rhs = 0.0;          // 14 (d^2 + R0^2)
  double slack = 0.0;        // middle - lhs
  bool pass = false;
};

MomentumBoundReport momentum_bound_check(const DiscreteMeasure& mu, const DiscreteMeasure& rho0,
                                         double r0_support);

struct RestrictionImprovementReport {
  double j_full = 0.0;
  double j_restricted = 0.0;
  double retained_mass = 0.0;
  bool improved = false;
  bool identical = false;  // support already inside the ball
};

RestrictionImprovementReport restriction_improvement_check(const DiscreteMeasure& mu,
                                                           const DiscreteMeasure& rho0,
                                                           double eps_radius);

}  // namespace eqm
