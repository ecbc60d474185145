#include "eqm/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eqm/rng.hpp"

namespace eqm {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

// interaction matrix; diag = exact cell average of the kernel (0 when the
// atoms are read as true point masses)
std::vector<double> interaction_matrix(const std::vector<double>& coords, int dim,
                                       const KernelSpec& spec, double diag) {
  std::size_t n = coords.size() / dim;
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = diag;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double r2 = 0.0;
      for (int k = 0; k < dim; ++k) {
        double d = coords[i * dim + k] - coords[j * dim + k];
        r2 += d * d;
      }
      if (r2 < 1e-28) throw DegenerateCandidates("coincident candidate points");
      double v = kernel_eval(spec, std::sqrt(r2));
      a[i * n + j] = v;
      a[j * n + i] = v;
    }
  return a;
}

struct Objective {
  const std::vector<double>& a;  // n x n
  std::size_t n;
  const DiscreteMeasure& rho0;
  const std::vector<double>& coords;
  int dim;
  bool interaction;
  std::vector<double> c_single;  // costs to a lone target atom; d^2 is linear then

  double interaction_of(const std::vector<double>& w) const {
    if (!interaction) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] == 0.0) continue;
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += a[i * n + j] * w[j];
      s += w[i] * row;
    }
    return s;
  }

  DiscreteMeasure measure_of(const std::vector<double>& w) const {
    return DiscreteMeasure(coords, w, dim);
  }

  TransportPlan plan_of(const std::vector<double>& w) const {
    if (!c_single.empty()) {
      TransportPlan plan{measure_of(w), rho0, {}, 0.0, {}, {}, false};
      plan.dual_source = c_single;
      plan.dual_target.assign(1, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double wi = plan.source.weight(i);
        if (wi <= 0.0) continue;
        plan.pairs.push_back({static_cast<int>(i), 0, wi});
        plan.cost += wi * c_single[i];
      }
      return plan;
    }
    return solve_exact(measure_of(w), rho0);
  }

  double transport_of(const std::vector<double>& w) const {
    if (!c_single.empty()) {
      double s = 0.0, tot = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        s += std::max(0.0, w[i]) * c_single[i];
        tot += std::max(0.0, w[i]);
      }
      return tot > 0.0 ? s / tot : 0.0;
    }
    return solve_exact(measure_of(w), rho0).cost;
  }

  double value(const std::vector<double>& w) const {
    return interaction_of(w) + transport_of(w);
  }

  // source dual by c-transform, defined for zero-weight candidates as well
  std::vector<double> source_dual(const TransportPlan& plan) const {
    std::vector<double> phi(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
      auto x = plan.source.point(i);
      for (std::size_t j = 0; j < rho0.size(); ++j) {
        double c = 0.5 * sq_dist(x, rho0.point(j));
        phi[i] = std::min(phi[i], c - plan.dual_target[j]);
      }
    }
    return phi;
  }

  std::vector<double> gradient(const std::vector<double>& w,
                               const std::vector<double>& phi) const {
    std::vector<double> g(phi);
    if (interaction) {
      for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += a[i * n + j] * w[j];
        g[i] += 2.0 * row;
      }
    }
    return g;
  }
};

}  // namespace

void project_simplex(std::vector<double>& w) {
  std::vector<double> u(w);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  std::size_t rho = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      theta = t;
    }
  }
  (void)rho;
  for (double& x : w) x = std::max(0.0, x - theta);
  double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= s;
}

namespace {

// Solve the stationarity system on the active set: 2 A_SS w_S - lambda = -phi_S,
// sum w_S = 1. Returns false when the bordered matrix is singular.
bool kkt_solve(const std::vector<double>& a, std::size_t n, const std::vector<std::size_t>& s,
               const std::vector<double>& phi, std::vector<double>& w_out, double& lambda_out) {
  std::size_t m = s.size();
  Eigen::MatrixXd k(m + 1, m + 1);
  Eigen::VectorXd rhs(m + 1);
  for (std::size_t p = 0; p < m; ++p) {
    for (std::size_t q = 0; q < m; ++q) k(p, q) = 2.0 * a[s[p] * n + s[q]];
    k(p, m) = -1.0;
    k(m, p) = 1.0;
    rhs(p) = -phi[s[p]];
  }
  k(m, m) = 0.0;
  rhs(m) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  if (!lu.isInvertible()) return false;
  Eigen::VectorXd sol = lu.solve(rhs);
  w_out.assign(m, 0.0);
  for (std::size_t p = 0; p < m; ++p) w_out[p] = sol(p);
  lambda_out = sol(m);
  return true;
}

}  // namespace

EquilibriumResult minimize(const DiscreteMeasure& rho0, const SolverConfig& cfg) {
  std::size_t n = cfg.n_candidates();
  if (n == 0) throw EmptyMeasure("no candidate points");
  std::vector<double> a(n * n, 0.0);
  if (cfg.interaction_enabled) {
    double diag = 0.0;
    if (cfg.cell_quadrature) {
      std::vector<double> spacing = cfg.cell_spacing;
      if (spacing.empty()) {
        double h2_min = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j) {
            double r2 = 0.0;
            for (int k = 0; k < cfg.dim; ++k) {
              double d = cfg.candidate_coords[i * cfg.dim + k] -
                         cfg.candidate_coords[j * cfg.dim + k];
              r2 += d * d;
            }
            h2_min = std::min(h2_min, r2);
          }
        if (!std::isfinite(h2_min) || h2_min <= 0.0)
          throw DegenerateCandidates("cannot infer a cell size");
        spacing.assign(cfg.dim, std::sqrt(h2_min));
      }
      diag = kernel_cell_average(cfg.kernel, spacing);
    }
    a = interaction_matrix(cfg.candidate_coords, cfg.dim, cfg.kernel, diag);
  }
  Objective obj{a, n, rho0, cfg.candidate_coords, cfg.dim, cfg.interaction_enabled, {}};
  if (rho0.size() == 1) {
    obj.c_single.resize(n);
    auto y = rho0.point(0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k < cfg.dim; ++k) {
        double d = cfg.candidate_coords[i * cfg.dim + k] - y[k];
        s += d * d;
      }
      obj.c_single[i] = 0.5 * s;
    }
  }

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<double> history;
  double j_cur = obj.value(w);
  history.push_back(j_cur);

  TransportPlan plan = obj.plan_of(w);
  std::vector<double> phi = obj.source_dual(plan);
  bool max_iters = false;

  int inner_budget = cfg.max_inner;
  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    bool moved = false;
    for (int it = 0; it < inner_budget; ++it) {
      std::vector<double> g = obj.gradient(w, phi);
      double eta = cfg.eta;
      bool accepted = false;
      while (eta > 1e-14) {
        std::vector<double> trial(n);
        for (std::size_t i = 0; i < n; ++i) trial[i] = w[i] - eta * g[i];
        project_simplex(trial);
        double move2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          double d = trial[i] - w[i];
          move2 += d * d;
        }
        if (move2 < 1e-30) break;
        double j_trial = obj.value(trial);
        bool ok = cfg.backtracking
                      ? j_trial <= j_cur - cfg.armijo / eta * move2
                      : j_trial < j_cur;
        if (ok) {
          w = std::move(trial);
          j_cur = j_trial;
          history.push_back(j_cur);
          accepted = true;
          moved = true;
          break;
        }
        eta *= 0.5;
      }
      if (!accepted) break;
      if (it == inner_budget - 1 && outer == cfg.max_outer - 1) max_iters = true;
    }
    plan = obj.plan_of(w);
    std::vector<double> phi_new = obj.source_dual(plan);
    double dphi = 0.0;
    for (std::size_t i = 0; i < n; ++i) dphi = std::max(dphi, std::abs(phi_new[i] - phi[i]));
    phi = std::move(phi_new);
    if (!moved && dphi < 1e-12) break;
  }

  // active-set KKT refinement: certifies the first-variation constancy that
  // descent alone approaches slowly
  double w_cut = 1e-8 / static_cast<double>(n);
  if (cfg.polish && cfg.interaction_enabled) {
    std::vector<double> w_best = w;
    double j_best = j_cur;
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < n; ++i)
      if (w[i] > w_cut) active.push_back(i);
    for (int round = 0; round < 80 && !active.empty(); ++round) {
      std::vector<double> ws;
      double lambda = 0.0;
      if (!kkt_solve(a, n, active, phi, ws, lambda)) break;
      double most_neg = 0.0;
      std::size_t neg_at = active.size();
      for (std::size_t p = 0; p < active.size(); ++p)
        if (ws[p] < most_neg) {
          most_neg = ws[p];
          neg_at = p;
        }
      if (most_neg < -1e-10) {
        active.erase(active.begin() + static_cast<long>(neg_at));
        continue;
      }
      std::vector<double> w_try(n, 0.0);
      for (std::size_t p = 0; p < active.size(); ++p)
        w_try[active[p]] = std::max(0.0, ws[p]);
      double sum = std::accumulate(w_try.begin(), w_try.end(), 0.0);
      for (double& x : w_try) x /= sum;

      TransportPlan plan_try = obj.plan_of(w_try);
      std::vector<double> phi_try = obj.source_dual(plan_try);
      double dphi = 0.0;
      for (std::size_t i = 0; i < n; ++i) dphi = std::max(dphi, std::abs(phi_try[i] - phi[i]));
      phi = std::move(phi_try);

      // off-support optimality: pull in candidates that want mass
      std::vector<double> g = obj.gradient(w_try, phi);
      double worst = 0.0;
      std::size_t worst_at = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (w_try[i] > 0.0) continue;
        double viol = lambda - g[i];
        if (viol > worst) {
          worst = viol;
          worst_at = i;
        }
      }
      w = w_try;
      plan = std::move(plan_try);
      j_cur = obj.interaction_of(w) + plan.cost;
      if (j_cur <= j_best) {
        j_best = j_cur;
        w_best = w;
      }
      if (worst > cfg.tol_el && worst_at < n) {
        active.push_back(worst_at);
        std::sort(active.begin(), active.end());
        continue;
      }
      if (dphi < 1e-12) break;
    }
  }

  EquilibriumResult res{obj.measure_of(w),
                        {},
                        0.0,
                        std::vector<char>(n, 0),
                        {},
                        std::move(plan),
                        max_iters,
                        std::nullopt,
                        std::move(history),
                        {}};
  res.energy.interaction = cfg.interaction_enabled ? obj.interaction_of(w) : 0.0;
  res.energy.transport = res.plan.cost;
  res.energy.total = res.energy.interaction + res.energy.transport;
  for (std::size_t i = 0; i < n; ++i) res.support_mask[i] = w[i] > w_cut;

  res.potential_at_atoms.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double u = 0.0;
    for (std::size_t j = 0; j < n; ++j) u += a[i * n + j] * w[j];
    res.potential_at_atoms[i] = u;
  }

  // lambda from the first-variation values 2U + |x - T(x)|^2 / 2 on support
  std::vector<double> bary = res.plan.barycentric_targets();
  std::vector<double> vals;
  for (std::size_t i = 0; i < n; ++i) {
    if (!res.support_mask[i]) continue;
    double dt2 = 0.0;
    for (int k = 0; k < cfg.dim; ++k) {
      double d = cfg.candidate_coords[i * cfg.dim + k] - bary[i * cfg.dim + k];
      dt2 += d * d;
    }
    vals.push_back(2.0 * res.potential_at_atoms[i] + 0.5 * dt2);
  }
  res.lambda_hat = median_of(vals);

  std::vector<Point> probes;
  probes.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    probes.emplace_back(cfg.candidate_coords.begin() + static_cast<long>(i) * cfg.dim,
                        cfg.candidate_coords.begin() + static_cast<long>(i + 1) * cfg.dim);
  res.el_report = el_residual(res, probes, 10000, cfg.rng_seed + 1, res.potential_at_atoms);
  return res;
}

ElReport el_residual(const EquilibriumResult& res, const std::vector<Point>& probe_points,
                     int pair_samples, std::uint64_t rng_seed,
                     const std::vector<double>& probe_potentials) {
  const DiscreteMeasure& mu = res.measure;
  KernelSpec spec = KernelSpec::log2d();
  ElReport rep;

  std::vector<double> bary = res.plan.barycentric_targets();
  int dim = mu.dim();
  std::vector<double> vals;
  std::vector<double> u_atoms(mu.size());
  bool consistent = res.potential_at_atoms.size() == mu.size();
  for (std::size_t i = 0; i < mu.size(); ++i)
    u_atoms[i] = consistent ? res.potential_at_atoms[i] : potential(mu, mu.point(i), spec);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (i < res.support_mask.size() && !res.support_mask[i]) continue;
    double dt2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      double d = mu.point(i)[k] - bary[i * dim + k];
      dt2 += d * d;
    }
    vals.push_back(2.0 * u_atoms[i] + 0.5 * dt2);
  }
  rep.lambda_hat = median_of(vals);
  double var = 0.0, mean = 0.0;
  for (double v : vals) mean += v;
  mean /= vals.empty() ? 1.0 : static_cast<double>(vals.size());
  for (double v : vals) {
    rep.max_support_dev = std::max(rep.max_support_dev, std::abs(v - rep.lambda_hat));
    var += (v - mean) * (v - mean);
  }
  rep.support_stddev = vals.size() > 1 ? std::sqrt(var / static_cast<double>(vals.size())) : 0.0;

  // eq (mon): 1/2|x0-y*|^2 - 1/2|x*-y*|^2 + 2U(x0) - 2U(x*) >= 0
  std::vector<double> u_probes(probe_points.size());
  for (std::size_t p = 0; p < probe_points.size(); ++p)
    u_probes[p] = probe_potentials.size() == probe_points.size()
                      ? probe_potentials[p]
                      : potential(mu, std::span<const double>(probe_points[p].data(),
                                                              probe_points[p].size()),
                                  spec);
  Rng rng(rng_seed);
  rep.min_mon_value = std::numeric_limits<double>::infinity();
  rep.probes = pair_samples;
  for (int t = 0; t < pair_samples; ++t) {
    const auto& e = res.plan.pairs[rng.below(res.plan.pairs.size())];
    std::size_t p = rng.below(probe_points.size());
    auto xs = mu.point(e.i);
    auto ys = res.plan.target.point(e.j);
    std::span<const double> x0(probe_points[p].data(), probe_points[p].size());
    double val = 0.5 * sq_dist(x0, ys) - 0.5 * sq_dist(xs, ys) + 2.0 * u_probes[p] -
                 2.0 * u_atoms[e.i];
    rep.min_mon_value = std::min(rep.min_mon_value, val);
    if (val < -1e-6) ++rep.mon_violations;
  }
  return rep;
}

EquilibriumResult confinement_loop(const DiscreteMeasure& rho0, const SolverConfig& cfg) {
  if (cfg.confinement_schedule.empty())
    throw Error("confinement_loop: empty radius schedule");
  for (std::size_t k = 1; k < cfg.confinement_schedule.size(); ++k)
    if (cfg.confinement_schedule[k] > cfg.confinement_schedule[k - 1])
      throw Error("confinement_loop: schedule must be nonincreasing");

  std::size_t n = cfg.n_candidates();
  auto restrict_candidates = [&](double eps) {
    std::vector<double> coords;
    for (std::size_t i = 0; i < n; ++i) {
      double r2 = 0.0;
      for (int k = 0; k < cfg.dim; ++k) {
        double x = cfg.candidate_coords[i * cfg.dim + k];
        r2 += x * x;
      }
      if (std::sqrt(r2) <= eps)
        coords.insert(coords.end(), cfg.candidate_coords.begin() + static_cast<long>(i) * cfg.dim,
                      cfg.candidate_coords.begin() + static_cast<long>(i + 1) * cfg.dim);
    }
    return coords;
  };

  SolverConfig sub = cfg;
  sub.confinement_schedule.clear();
  sub.candidate_coords = restrict_candidates(cfg.confinement_schedule.front());
  if (sub.candidate_coords.empty()) throw EmptyRestriction("no candidates inside first radius");
  EquilibriumResult best = minimize(rho0, sub);
  best.confinement_radius = cfg.confinement_schedule.front();

  for (std::size_t k = 1; k < cfg.confinement_schedule.size(); ++k) {
    double eps = cfg.confinement_schedule[k];
    // does restricting the current minimizer to B_eps not increase J?
    bool all_inside = true;
    for (std::size_t i = 0; i < best.measure.size(); ++i) {
      if (best.measure.weight(i) <= 0.0) continue;
      double r2 = 0.0;
      for (double x : best.measure.point(i)) r2 += x * x;
      if (std::sqrt(r2) > eps) {
        all_inside = false;
        break;
      }
    }
    if (all_inside) {
      best.confinement_radius = eps;
      continue;
    }
    RestrictionImprovementReport rep;
    try {
      rep = restriction_improvement_check(best.measure, rho0, eps);
    } catch (const EmptyRestriction&) {
      break;
    }
    if (rep.j_restricted > rep.j_full) break;
    sub.candidate_coords = restrict_candidates(eps);
    if (sub.candidate_coords.empty()) break;
    best = minimize(rho0, sub);
    best.confinement_radius = eps;
  }
  return best;
}

// ---- radial specialization -----------------------------------------------

RadialTransport radial_quantile_transport(const std::vector<double>& r,
                                          const std::vector<double>& w,
                                          const std::vector<double>& s,
                                          const std::vector<double>& v) {
  RadialTransport out;
  out.dual_source.assign(r.size(), 0.0);
  auto cost = [&](std::size_t ii, std::size_t jj) {
    double d = r[ii] - s[jj];
    return 0.5 * d * d;
  };
  // dual chaining must follow support pairs only: routing it through
  // zero-weight shells imposes equality on non-support arcs and corrupts the
  // duals, so run the monotone coupling over positive-mass atoms
  std::vector<std::size_t> si, tj;
  for (std::size_t k = 0; k < r.size(); ++k)
    if (w[k] > 1e-15) si.push_back(k);
  for (std::size_t k = 0; k < s.size(); ++k)
    if (v[k] > 1e-15) tj.push_back(k);
  if (si.empty() || tj.empty()) return out;
  std::vector<double> beta(tj.size(), 0.0);
  std::vector<double> alpha(si.size(), 0.0);
  std::size_t p = 0, q = 0;
  double a = w[si[0]], b = v[tj[0]];
  beta[0] = cost(si[0], tj[0]);
  while (true) {
    double m = std::min(a, b);
    out.cost += m * cost(si[p], tj[q]);
    a -= m;
    b -= m;
    bool adv_src = a <= 1e-15 && p + 1 < si.size();
    bool adv_tgt = b <= 1e-15 && q + 1 < tj.size();
    if (adv_src) {
      alpha[p + 1] = cost(si[p + 1], tj[q]) - beta[q];
      ++p;
      a = w[si[p]];
    } else if (adv_tgt) {
      beta[q + 1] = cost(si[p], tj[q + 1]) - alpha[p];
      ++q;
      b = v[tj[q]];
    } else {
      break;
    }
  }
  // extend to every shell by c-transform; on the support this reproduces the
  // chained values, and for empty shells it is the tight marginal cost of
  // placing mass there
  for (std::size_t k = 0; k < r.size(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t qq = 0; qq < tj.size(); ++qq)
      best = std::min(best, cost(k, tj[qq]) - beta[qq]);
    out.dual_source[k] = best;
  }
  return out;
}

double radial_potential(const std::vector<double>& radii, const std::vector<double>& weights,
                        double r) {
  double u = 0.0;
  for (std::size_t k = 0; k < radii.size(); ++k)
    u -= weights[k] * std::log(std::max(r, radii[k]));
  return u;
}

namespace {

// Average of -log t over the annulus [lo, hi]: the exact interaction of any
// mass at radius <= lo with unit mass spread uniformly in radius on [lo, hi].
double annulus_log_avg(double lo, double hi) {
  auto F2 = [](double t) { return t > 0.0 ? 0.5 * t * t * std::log(t) - 0.25 * t * t : 0.0; };
  return -2.0 * (F2(hi) - F2(lo)) / (hi * hi - lo * lo);
}

// Self-interaction per unit mass^2 of mass spread uniformly in radius on
// [lo, hi].  Finite, unlike the delta-ring self-energy; using it on the
// diagonal keeps the discrete quadratic form convex so weights do not collapse
// onto isolated shells.
double annulus_self_energy(double lo, double hi) {
  auto F2 = [](double t) { return t > 0.0 ? 0.5 * t * t * std::log(t) - 0.25 * t * t : 0.0; };
  auto F4 = [](double t) {
    return t > 0.0 ? 0.25 * t * t * t * t * std::log(t) - 0.0625 * t * t * t * t : 0.0;
  };
  double d = hi * hi - lo * lo;
  return (2.0 / d) * (2.0 / d) * (-(F4(hi) - F4(lo)) + lo * lo * (F2(hi) - F2(lo)));
}

}  // namespace

RadialEquilibrium minimize_radial(const RadialConfig& cfg) {
  std::size_t n = cfg.shell_radii.size();
  if (n == 0) throw EmptyMeasure("no shells");
  const auto& r = cfg.shell_radii;
  // shell k's mass is treated as spread uniformly in radius over
  // [r_k - dk/2, r_k + dk/2], matching the smoothed density/potential grids
  std::vector<double> lo(n), hi(n);
  for (std::size_t k = 0; k < n; ++k) {
    double dk = (k + 1 < n ? r[k + 1] - r[k] : (k > 0 ? r[k] - r[k - 1] : r[k]));
    lo[k] = std::max(r[k] - 0.5 * dk, 0.0);
    hi[k] = r[k] + 0.5 * dk;
  }
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j)
        a[i * n + j] = annulus_self_energy(lo[i], hi[i]);
      else {
        std::size_t outer = (r[i] > r[j]) ? i : j;
        a[i * n + j] = annulus_log_avg(lo[outer], hi[outer]);
      }
    }

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  auto transport = [&](const std::vector<double>& ww) {
    return radial_quantile_transport(r, ww, cfg.target_radii, cfg.target_weights);
  };
  auto interaction_of = [&](const std::vector<double>& ww) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += a[i * n + j] * ww[j];
      s += ww[i] * row;
    }
    return s;
  };

  RadialTransport rt = transport(w);
  double j_cur = interaction_of(w) + rt.cost;
  for (int it = 0; it < cfg.max_iters; ++it) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += a[i * n + j] * w[j];
      g[i] = 2.0 * row + rt.dual_source[i];
    }
    double eta = 1.0;
    bool accepted = false;
    while (eta > 1e-14) {
      std::vector<double> trial(n);
      for (std::size_t i = 0; i < n; ++i) trial[i] = w[i] - eta * g[i];
      project_simplex(trial);
      RadialTransport rt_trial = transport(trial);
      double j_trial = interaction_of(trial) + rt_trial.cost;
      if (j_trial < j_cur - cfg.tol * std::abs(j_cur)) {
        w = std::move(trial);
        rt = std::move(rt_trial);
        j_cur = j_trial;
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) break;
  }

  if (cfg.polish) {
    // Outer loop: refresh the transport duals; inner loop: solve the simplex
    // QP  min w^T A w + phi^T w  exactly at frozen duals with a two-sided
    // active set (drop shells the equality solve pushes negative, admit
    // shells whose first-order value beats lambda).  Solving the QP to
    // optimality before touching the duals matters: the near-flat oscillatory
    // directions of A otherwise strand the iterate on spurious sparse
    // stationary points.
    std::vector<std::size_t> active(n);
    std::iota(active.begin(), active.end(), std::size_t{0});
    // tiny ridge: the quadratic form is nearly flat along shell-scale
    // oscillations, so the minimizer is selected only up to such wiggles;
    // the ridge picks the minimum-norm (smooth) representative while
    // perturbing the stationarity balance by O(eps / n)
    const double eps_ridge = 1e-1;
    std::vector<double> a_ridge = a;
    for (std::size_t i = 0; i < n; ++i) a_ridge[i * n + i] += eps_ridge;
    std::vector<double> alpha = rt.dual_source;  // damped dual estimate
    for (int outer = 0; outer < 80; ++outer) {
      bool solved = false;
      std::vector<double> w_qp(n, 0.0);
      for (int it = 0; it < 4 * static_cast<int>(n) && !active.empty(); ++it) {
        std::vector<double> ws;
        double lambda = 0.0;
        if (!kkt_solve(a_ridge, n, active, alpha, ws, lambda)) break;
        double most_neg = -1e-10;
        std::size_t neg_at = active.size();
        for (std::size_t p = 0; p < active.size(); ++p)
          if (ws[p] < most_neg) {
            most_neg = ws[p];
            neg_at = p;
          }
        if (neg_at < active.size()) {
          active.erase(active.begin() + static_cast<long>(neg_at));
          continue;
        }
        std::fill(w_qp.begin(), w_qp.end(), 0.0);
        for (std::size_t p = 0; p < active.size(); ++p) w_qp[active[p]] = std::max(0.0, ws[p]);
        double v_min = -1e-9 * (1.0 + std::abs(lambda));
        std::size_t add_at = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (w_qp[i] > 0.0) continue;
          double row = 0.0;
          for (std::size_t j = 0; j < n; ++j) row += a_ridge[i * n + j] * w_qp[j];
          double v = 2.0 * row + alpha[i] - lambda;
          if (v < v_min) {
            v_min = v;
            add_at = i;
          }
        }
        if (add_at < n) {
          active.insert(std::lower_bound(active.begin(), active.end(), add_at), add_at);
          continue;
        }
        solved = true;
        break;
      }
      if (!solved) break;
      double sum = std::accumulate(w_qp.begin(), w_qp.end(), 0.0);
      for (double& x : w_qp) x /= sum;
      w = std::move(w_qp);
      RadialTransport rt_new = transport(w);
      double dalpha = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dalpha = std::max(dalpha, std::abs(rt_new.dual_source[i] - alpha[i]));
        alpha[i] = 0.5 * alpha[i] + 0.5 * rt_new.dual_source[i];
      }
      rt = std::move(rt_new);
      j_cur = interaction_of(w) + rt.cost;
      if (dalpha < 1e-10) break;
    }
  }

  RadialEquilibrium out;
  out.radii = r;
  out.weights = w;
  out.interaction = interaction_of(w);
  out.transport = rt.cost;
  std::vector<double> vals;
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] <= 1e-12) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += a[i * n + j] * w[j];
    vals.push_back(2.0 * row + rt.dual_source[i]);
  }
  out.lambda_hat = median_of(vals);
  for (double v : vals) out.kkt_residual = std::max(out.kkt_residual, std::abs(v - out.lambda_hat));
  return out;
}

namespace {

// shell mass CDF with shell k's mass spread uniformly in AREA over the
// annulus [r_k - dk/2, r_k + dk/2]; a radius-uniform spread would give an
// area density varying like 1/r inside each annulus, and that sawtooth
// dominates grid residuals once the grid resolves the shell spacing
double shell_cdf(const std::vector<double>& radii, const std::vector<double>& weights, double r) {
  double m = 0.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    double dk = (k + 1 < radii.size() ? radii[k + 1] - radii[k]
                                      : (k > 0 ? radii[k] - radii[k - 1] : radii[k]));
    double lo = std::max(radii[k] - 0.5 * dk, 0.0), hi = radii[k] + 0.5 * dk;
    if (r >= hi)
      m += weights[k];
    else if (r > lo)
      m += weights[k] * (r * r - lo * lo) / (hi * hi - lo * lo);
  }
  return m;
}

// area density of the same smoothed distribution: piecewise constant per shell
double shell_area_density(const std::vector<double>& radii, const std::vector<double>& weights,
                          double r) {
  const double pi = 3.14159265358979323846;
  double f = 0.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    double dk = (k + 1 < radii.size() ? radii[k + 1] - radii[k]
                                      : (k > 0 ? radii[k] - radii[k - 1] : radii[k]));
    double lo = std::max(radii[k] - 0.5 * dk, 0.0), hi = radii[k] + 0.5 * dk;
    if (r >= lo && r < hi) f += weights[k] / (pi * (hi * hi - lo * lo));
  }
  return f;
}

// Potential of the distribution shell_cdf describes (area-uniform annuli).
// C^1 in r with bounded second derivative, so grid second differences of the
// resulting field stay well behaved.
double smoothed_shell_potential(const std::vector<double>& radii,
                                const std::vector<double>& weights, double r) {
  auto F2 = [](double t) { return t > 0.0 ? 0.5 * t * t * std::log(t) - 0.25 * t * t : 0.0; };
  double u = 0.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    double dk = (k + 1 < radii.size() ? radii[k + 1] - radii[k]
                                      : (k > 0 ? radii[k] - radii[k - 1] : radii[k]));
    double lo = std::max(radii[k] - 0.5 * dk, 0.0), hi = radii[k] + 0.5 * dk;
    double d = hi * hi - lo * lo;
    if (r >= hi) {
      u -= weights[k] * std::log(r);
    } else if (r <= lo) {
      u -= weights[k] * 2.0 * (F2(hi) - F2(lo)) / d;
    } else {
      double m_in = weights[k] * (r * r - lo * lo) / d;
      u -= m_in * std::log(r) + weights[k] * 2.0 * (F2(hi) - F2(r)) / d;
    }
  }
  return u;
}

}  // namespace

GridDensity radial_density_to_grid(const std::vector<double>& radii,
                                   const std::vector<double>& weights, const Point& origin,
                                   const std::vector<double>& spacing,
                                   const std::vector<std::size_t>& shape) {
  if (shape.size() != 2) throw NotTwoDimensional();
  std::vector<double> cells(shape[0] * shape[1], 0.0);
  for (std::size_t i = 0; i < shape[0]; ++i) {
    double x = origin[0] + spacing[0] * (i + 0.5);
    for (std::size_t j = 0; j < shape[1]; ++j) {
      double y = origin[1] + spacing[1] * (j + 0.5);
      double rr = std::hypot(x, y);
      cells[i * shape[1] + j] = shell_area_density(radii, weights, rr);
    }
  }
  return GridDensity(origin, spacing, shape, std::move(cells), /*normalize=*/true);
}

PotentialField radial_potential_on_grid(const std::vector<double>& radii,
                                        const std::vector<double>& weights, const Point& origin,
                                        const std::vector<double>& spacing,
                                        const std::vector<std::size_t>& shape) {
  if (shape.size() != 2) throw NotTwoDimensional();
  PotentialField f;
  f.origin = origin;
  f.spacing = spacing;
  f.shape = shape;
  f.values.assign(shape[0] * shape[1], 0.0);
  f.gradient.assign(2, std::vector<double>(shape[0] * shape[1], 0.0));
  f.source = "radial";
  for (std::size_t i = 0; i < shape[0]; ++i) {
    double x = origin[0] + spacing[0] * (i + 0.5);
    for (std::size_t j = 0; j < shape[1]; ++j) {
      double y = origin[1] + spacing[1] * (j + 0.5);
      double rr = std::hypot(x, y);
      std::size_t c = i * shape[1] + j;
      f.values[c] = smoothed_shell_potential(radii, weights, std::max(rr, 1e-12));
      double m = shell_cdf(radii, weights, rr);
      double coeff = rr > 1e-12 ? -m / (rr * rr) : 0.0;
      f.gradient[0][c] = coeff * x;
      f.gradient[1][c] = coeff * y;
    }
  }
  return f;
}

}  // namespace eqm
