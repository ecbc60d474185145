#include "eqm/energy.hpp"

#include <cmath>

#include "eqm/transport.hpp"

namespace eqm {

double interaction_energy(const DiscreteMeasure& mu, const KernelSpec& spec) {
  std::size_t n = mu.size();
  if (n < 2) throw TooFewAtoms();
  int dim = mu.dim();
  const auto& c = mu.coords();
  const auto& w = mu.weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double r2 = 0.0;
      for (int k = 0; k < dim; ++k) {
        double d = c[i * dim + k] - c[j * dim + k];
        r2 += d * d;
      }
      sum += 2.0 * w[i] * w[j] * kernel_eval(spec, std::sqrt(r2));
    }
  }
  return sum;
}

double interaction_energy_grid(const GridDensity& rho, const KernelSpec& spec) {
  int dim = rho.dim();
  const auto& shape = rho.shape();
  const auto& h = rho.spacing();
  double vol = rho.cell_volume();
  double self_avg = kernel_cell_average(spec, h);
  std::vector<std::size_t> strides(dim, 1);
  for (int k = dim - 2; k >= 0; --k) strides[k] = strides[k + 1] * shape[k + 1];

  std::vector<std::size_t> nz;
  for (std::size_t c = 0; c < rho.n_cells(); ++c)
    if (rho.cells()[c] > 0.0) nz.push_back(c);

  double sum = 0.0;
  for (std::size_t a = 0; a < nz.size(); ++a) {
    double ma = rho.cells()[nz[a]] * vol;
    sum += ma * ma * self_avg;
    for (std::size_t b = a + 1; b < nz.size(); ++b) {
      double mb = rho.cells()[nz[b]] * vol;
      double r2 = 0.0;
      std::size_t u = nz[a], v = nz[b];
      for (int k = 0; k < dim; ++k) {
        long iu = static_cast<long>(u / strides[k]), iv = static_cast<long>(v / strides[k]);
        u %= strides[k];
        v %= strides[k];
        double d = (iu - iv) * h[k];
        r2 += d * d;
      }
      sum += 2.0 * ma * mb * kernel_eval(spec, std::sqrt(r2));
    }
  }
  return sum;
}

EnergyBreakdown total_energy(const DiscreteMeasure& mu, const DiscreteMeasure& rho0,
                             const KernelSpec& spec) {
  EnergyBreakdown e;
  e.interaction = interaction_energy(mu, spec);
  e.transport = wasserstein_d2(mu, rho0);
  e.total = e.interaction + e.transport;
  return e;
}

double confined_energy(const DiscreteMeasure& mu, double g) {
  return -interaction_energy(mu, KernelSpec::log2d()) + g * second_moment(mu);
}

MomentumBoundReport momentum_bound_check(const DiscreteMeasure& mu, const DiscreteMeasure& rho0,
                                         double r0_support) {
  for (std::size_t j = 0; j < rho0.size(); ++j) {
    double r2 = 0.0;
    for (double x : rho0.point(j)) r2 += x * x;
    if (std::sqrt(r2) > r0_support + 1e-12)
      throw SupportViolation("rho0 has an atom outside B_{R0}");
  }
  MomentumBoundReport rep;
  double d2 = wasserstein_d2(mu, rho0);
  double m0 = second_moment(rho0);
  rep.lhs = second_moment(mu);
  rep.middle = 4.0 * d2 + 14.0 * m0;
  rep.rhs = 14.0 * (d2 + r0_support * r0_support);
  rep.slack = rep.middle - rep.lhs;
  rep.pass = rep.lhs <= rep.middle + 1e-9 && rep.middle <= rep.rhs + 1e-9;
  return rep;
}

RestrictionImprovementReport restriction_improvement_check(const DiscreteMeasure& mu,
                                                           const DiscreteMeasure& rho0,
                                                           double eps_radius) {
  Ball b(Point(mu.dim(), 0.0), eps_radius);
  auto [restricted, mass] = restrict_normalize(mu, b);
  RestrictionImprovementReport rep;
  rep.retained_mass = mass;
  rep.identical = restricted.size() == mu.size();
  KernelSpec spec = KernelSpec::log2d();
  auto j_of = [&](const DiscreteMeasure& m) {
    double inter = m.size() >= 2 ? interaction_energy(m, spec) : 0.0;
    return inter + wasserstein_d2(m, rho0);
  };
  rep.j_full = j_of(mu);
  rep.j_restricted = rep.identical ? rep.j_full : j_of(restricted);
  rep.improved = rep.j_restricted < rep.j_full;
  return rep;
}

}  // namespace eqm
