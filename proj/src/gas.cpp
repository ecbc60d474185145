#include "eqm/gas.hpp"

#include <algorithm>
#include <cmath>

#include "eqm/rng.hpp"

namespace eqm {

namespace {

constexpr double kPi = 3.14159265358979323846;

double kappa_of(const GasConfig& cfg) {
  return cfg.kappa_mode == KappaMode::ScaledByN
             ? static_cast<double>(cfg.n_particles) * cfg.g
             : static_cast<double>(cfg.n_particles) / cfg.g;
}

}  // namespace

double semicircle_density(double x, double g) {
  double r2 = 2.0 / g;
  if (x * x >= r2) return 0.0;
  return std::sqrt(r2 - x * x) / (kPi * g);
}

double semicircle_density_normalized(double x, double g) {
  // mass of the verbatim form by Simpson quadrature (it is 1/g^2 analytically,
  // but the normalization is pinned to the printed expression, not a guess)
  double r = std::sqrt(2.0 / g);
  int n = 2000;
  double h = 2.0 * r / n, mass = 0.0;
  for (int k = 0; k <= n; ++k) {
    double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    mass += w * semicircle_density(-r + k * h, g);
  }
  mass *= h / 3.0;
  return semicircle_density(x, g) / mass;
}

double semicircle_cdf(double x, double g) {
  double r = std::sqrt(2.0 / g);
  if (x <= -r) return 0.0;
  if (x >= r) return 1.0;
  return 0.5 + x * std::sqrt(r * r - x * x) / (kPi * r * r) + std::asin(x / r) / kPi;
}

GasSamples sample_gas(const GasConfig& cfg) {
  int n = cfg.n_particles;
  if (n < 2) throw TooFewAtoms();
  if (cfg.g <= 0.0) throw Error("gas: g must be positive");
  double kappa = kappa_of(cfg);
  double r = std::sqrt(2.0 / cfg.g);

  Rng rng = Rng::stream(cfg.rng_seed, "gas-chain");
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.uniform(-r, r);

  double scale = cfg.proposal_scale;
  long acc_window = 0, tries_window = 0;
  long acc_total = 0, tries_total = 0;

  auto sweep = [&](bool record_rate) {
    for (int i = 0; i < n; ++i) {
      double xp = x[i] + scale * rng.normal();
      double dlog = 0.0;
      bool reject = false;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        double dn = std::abs(xp - x[j]);
        if (dn < 1e-300) {
          reject = true;  // coincident proposal: W diverges
          break;
        }
        dlog += std::log(dn) - std::log(std::abs(x[i] - x[j]));
      }
      // W change: interaction pairs count twice in the double sum
      double dw = reject ? 0.0 : -2.0 * dlog + kappa * (xp * xp - x[i] * x[i]);
      ++tries_window;
      if (record_rate) ++tries_total;
      if (!reject && std::log(rng.uniform() + 1e-300) < -dw) {
        x[i] = xp;
        ++acc_window;
        if (record_rate) ++acc_total;
      }
    }
  };

  for (int s = 0; s < cfg.burn_in; ++s) {
    sweep(false);
    if ((s + 1) % 25 == 0 && tries_window > 0) {
      double rate = static_cast<double>(acc_window) / static_cast<double>(tries_window);
      scale *= std::exp(rate - 0.4);
      scale = std::clamp(scale, 1e-6, 10.0 * r);
      acc_window = tries_window = 0;
    }
  }

  GasSamples out;
  out.n_particles = n;
  out.positions.reserve(static_cast<std::size_t>(cfg.sweeps) * n);
  for (int s = 0; s < cfg.sweeps; ++s) {
    sweep(true);
    out.positions.insert(out.positions.end(), x.begin(), x.end());
  }
  out.acceptance_rate =
      tries_total > 0 ? static_cast<double>(acc_total) / static_cast<double>(tries_total) : 0.0;
  out.proposal_scale_final = scale;
  out.acceptance_flagged = out.acceptance_rate < 0.1 || out.acceptance_rate > 0.9;
  return out;
}

double ks_statistic(std::vector<double> values, double g) {
  if (values.size() < 10000) throw TooFewSamples();
  std::sort(values.begin(), values.end());
  double n = static_cast<double>(values.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double f = semicircle_cdf(values[i], g);
    ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - f));
    ks = std::max(ks, std::abs(static_cast<double>(i) / n - f));
  }
  return ks;
}

double histogram_compare(const GasSamples& samples, double g) {
  return ks_statistic(samples.positions, g);
}

OneDRelationReport one_d_relation_check(const EquilibriumResult& res, double tol) {
  const DiscreteMeasure& mu = res.measure;
  if (mu.dim() != 1) throw WrongDimension();
  const DiscreteMeasure& tgt = res.plan.target;
  if (tgt.size() != 1 || std::abs(tgt.point(0)[0]) > 1e-12)
    throw WrongTarget("target must be a Dirac at the origin");

  KernelSpec spec = KernelSpec::log2d();
  bool consistent = res.potential_at_atoms.size() == mu.size();
  std::vector<double> vals;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) <= 0.0) continue;
    double xi = mu.point(i)[0];
    double u = consistent ? res.potential_at_atoms[i] : potential(mu, mu.point(i), spec);
    vals.push_back(2.0 * u + 0.5 * xi * xi);
  }
  OneDRelationReport rep;
  if (vals.empty()) throw NoSupport();
  std::sort(vals.begin(), vals.end());
  rep.lambda = vals.size() % 2 ? vals[vals.size() / 2]
                               : 0.5 * (vals[vals.size() / 2 - 1] + vals[vals.size() / 2]);
  for (double v : vals) rep.max_dev = std::max(rep.max_dev, std::abs(v - rep.lambda));
  rep.pass = rep.max_dev <= tol;
  return rep;
}

}  // namespace eqm
