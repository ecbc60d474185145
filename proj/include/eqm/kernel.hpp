#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eqm/measure.hpp"

namespace eqm {

enum class KernelKind { Log2D, Riesz };

struct KernelSpec {
  KernelKind kind = KernelKind::Log2D;
  int n = 2;                          // ambient dimension for Riesz, n >= 3
  std::optional<double> truncation_radius;  // K_{r0} = 1_{B_{r0}} K

  static KernelSpec log2d(std::optional<double> r0 = std::nullopt) {
    return {KernelKind::Log2D, 2, r0};
  }
  static KernelSpec riesz(int n, std::optional<double> r0 = std::nullopt);
};

double kernel_eval(const KernelSpec& spec, double r);

// Mean of the kernel over a grid cell centered at the singularity; used for
// the self-cell term in grid sums and grid interaction energies.
double kernel_cell_average(const KernelSpec& spec, const std::vector<double>& spacing);

// Pointwise potential U^mu(x) = sum_i w_i K(x - x_i). Atoms closer than
// delta_sing are skipped and counted in *skipped.
double potential(const DiscreteMeasure& mu, std::span<const double> x, const KernelSpec& spec,
                 int* skipped = nullptr);

std::vector<double> grad_potential(const DiscreteMeasure& mu, std::span<const double> x,
                                   const KernelSpec& spec, int* skipped = nullptr);

struct PotentialField {
  Point origin;
  std::vector<double> spacing;
  std::vector<std::size_t> shape;
  std::vector<double> values;               // U at cell centers
  std::vector<std::vector<double>> gradient;  // one array per axis
  std::string source;

  double value_at(std::span<const std::size_t> idx) const;
};

PotentialField potential_field_on_grid(const GridDensity& rho, const KernelSpec& spec);

// Paper-form Fourier transform of the truncated 2D log kernel:
//   c1/(4 pi |xi|^2) (1 - J0(2 pi r0 |xi|)),
// with the removable singularity at xi = 0 filled by its limit.
double truncated_kernel_fourier(double xi_norm, double r0, double c1);

// Calibrated constant, fixed by matching the Fourier-side energy against
// direct quadrature on a Gaussian test density (see tests). With it the
// formula above is the exact transform of log(r0/|x|) on B_{r0}.
inline constexpr double kLogKernelFourierC1 = 2.0;

// Fourier-side interaction energy of a compactly supported 2D grid density.
// The raw spectral sum corresponds to the kernel log(r0/|x-y|) on the support;
// the log(r0) offset is removed so the result matches the direct log(1/r)
// interaction energy. A breakdown exposing the nonnegative spectral sum is
// also available.
struct FourierEnergy {
  double energy = 0.0;        // spectral_sum - (c1/2) log(r0) mass^2: matches I[rho]
  double spectral_sum = 0.0;  // sum |rho_hat|^2 K_hat dxi >= 0
};

FourierEnergy fourier_energy_detail(const GridDensity& rho, double r0,
                                    double c1 = kLogKernelFourierC1);

inline double fourier_energy(const GridDensity& rho, double r0, double c1 = kLogKernelFourierC1) {
  return fourier_energy_detail(rho, r0, c1).energy;
}

// Support diameter of a grid density (cells above a relative threshold).
double support_diameter(const GridDensity& rho, double rel_threshold = 1e-14);

}  // namespace eqm
