#include "eqm/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eqm/rng.hpp"

namespace eqm {

namespace {
constexpr double kMassTol = 1e-14;
constexpr double kInf = std::numeric_limits<double>::infinity();

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}
}  // namespace

std::vector<double> cost_matrix(const DiscreteMeasure& x, const DiscreteMeasure& y) {
  if (x.dim() != y.dim()) throw DimensionMismatch();
  std::size_t n = x.size(), m = y.size();
  std::vector<double> c(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) c[i * m + j] = 0.5 * sq_dist(x.point(i), y.point(j));
  return c;
}

double TransportPlan::dual_objective() const {
  double s = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) s += source.weight(i) * dual_source[i];
  for (std::size_t j = 0; j < target.size(); ++j) s += target.weight(j) * dual_target[j];
  return s;
}

double TransportPlan::marginal_error() const {
  std::vector<double> row(source.size(), 0.0), col(target.size(), 0.0);
  for (const auto& e : pairs) {
    row[e.i] += e.mass;
    col[e.j] += e.mass;
  }
  double err = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) err = std::max(err, std::abs(row[i] - source.weight(i)));
  for (std::size_t j = 0; j < target.size(); ++j) err = std::max(err, std::abs(col[j] - target.weight(j)));
  return err;
}

std::vector<double> TransportPlan::barycentric_targets() const {
  int dim = source.dim();
  std::vector<double> t(source.size() * dim, 0.0);
  std::vector<double> row(source.size(), 0.0);
  for (const auto& e : pairs) {
    row[e.i] += e.mass;
    auto y = target.point(e.j);
    for (int k = 0; k < dim; ++k) t[e.i * dim + k] += e.mass * y[k];
  }
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (row[i] > kMassTol) {
      for (int k = 0; k < dim; ++k) t[i * dim + k] /= row[i];
    } else {
      auto x = source.point(i);
      for (int k = 0; k < dim; ++k) t[i * dim + k] = x[k];
    }
  }
  return t;
}

TransportPlan solve_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::size_t n = mu.size(), m = nu.size();
  if (n * m > kExactSizeCap) throw ProblemTooLarge();
  std::vector<double> c = cost_matrix(mu, nu);

  // successive shortest paths with node potentials (reduced costs stay >= 0)
  std::vector<double> pot(n + m, 0.0);
  std::vector<double> flow(n * m, 0.0);
  std::vector<double> rs(mu.weights()), rd(nu.weights());
  // weights renormalize to one only up to rounding; transport the overlap
  double remaining = std::min(std::accumulate(rs.begin(), rs.end(), 0.0),
                              std::accumulate(rd.begin(), rd.end(), 0.0)) -
                     16.0 * kMassTol * static_cast<double>(n + m);
  std::size_t max_rounds = 8 * (n + m) + 64;
  std::size_t rounds = 0;

  std::vector<double> dist(n + m);
  std::vector<int> parent(n + m);
  std::vector<char> done(n + m);

  while (remaining > kMassTol) {
    if (++rounds > max_rounds) throw Infeasible("transport augmentation did not terminate");
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < n; ++i)
      if (rs[i] > kMassTol) dist[i] = 0.0;

    // dense Dijkstra over the bipartite residual graph
    int best_sink = -1;
    for (std::size_t iter = 0; iter < n + m; ++iter) {
      int u = -1;
      double du = kInf;
      for (std::size_t v = 0; v < n + m; ++v)
        if (!done[v] && dist[v] < du) {
          du = dist[v];
          u = static_cast<int>(v);
        }
      if (u < 0) break;
      done[u] = 1;
      if (static_cast<std::size_t>(u) >= n && rd[u - n] > kMassTol) {
        best_sink = u;
        break;
      }
      if (static_cast<std::size_t>(u) < n) {
        std::size_t i = u;
        for (std::size_t j = 0; j < m; ++j) {
          double rc = c[i * m + j] + pot[i] - pot[n + j];
          if (rc < 0.0) rc = 0.0;  // guard float drift
          if (du + rc < dist[n + j]) {
            dist[n + j] = du + rc;
            parent[n + j] = u;
          }
        }
      } else {
        std::size_t j = u - n;
        for (std::size_t i = 0; i < n; ++i) {
          if (flow[i * m + j] <= 0.0) continue;
          double rc = -c[i * m + j] - pot[i] + pot[n + j];
          if (rc < 0.0) rc = 0.0;
          if (du + rc < dist[i]) {
            dist[i] = du + rc;
            parent[i] = u;
          }
        }
      }
    }
    if (best_sink < 0) {
      if (remaining < 1e-9) break;  // only rounding dust is left unrouted
      throw Infeasible("no augmenting path (mass mismatch?)");
    }
    double d_target = dist[best_sink];
    for (std::size_t v = 0; v < n + m; ++v)
      pot[v] += std::min(dist[v], d_target);

    // bottleneck along the path
    double delta = rd[best_sink - n];
    for (int v = best_sink; parent[v] >= 0; v = parent[v]) {
      int p = parent[v];
      if (static_cast<std::size_t>(v) >= n) {
        // arc p(source) -> v(sink): capacity unlimited
      } else {
        delta = std::min(delta, flow[v * static_cast<long>(m) + (p - n)]);
      }
      if (static_cast<std::size_t>(p) < n && parent[p] < 0) delta = std::min(delta, rs[p]);
    }
    for (int v = best_sink; parent[v] >= 0; v = parent[v]) {
      int p = parent[v];
      if (static_cast<std::size_t>(v) >= n) {
        flow[p * static_cast<long>(m) + (v - n)] += delta;
      } else {
        flow[v * static_cast<long>(m) + (p - n)] -= delta;
      }
      if (static_cast<std::size_t>(p) < n && parent[p] < 0) rs[p] -= delta;
    }
    rd[best_sink - n] -= delta;
    remaining -= delta;
  }

  TransportPlan plan{mu, nu, {}, 0.0, {}, {}, false};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (flow[i * m + j] > 0.0) {
        plan.pairs.push_back({static_cast<int>(i), static_cast<int>(j), flow[i * m + j]});
        plan.cost += flow[i * m + j] * c[i * m + j];
      }
  plan.dual_source.resize(n);
  plan.dual_target.resize(m);
  for (std::size_t i = 0; i < n; ++i) plan.dual_source[i] = -pot[i];
  for (std::size_t j = 0; j < m; ++j) plan.dual_target[j] = pot[n + j];
  return plan;
}

TransportPlan solve_entropic(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps_reg,
                             int max_iters) {
  if (!(eps_reg > 0.0)) throw Error("solve_entropic: eps_reg must be positive");
  std::size_t n = mu.size(), m = nu.size();
  std::vector<double> c = cost_matrix(mu, nu);
  std::vector<double> f(n, 0.0), g(m, 0.0);
  std::vector<double> loga(n), logb(m);
  for (std::size_t i = 0; i < n; ++i) loga[i] = std::log(mu.weight(i) + 1e-300);
  for (std::size_t j = 0; j < m; ++j) logb[j] = std::log(nu.weight(j) + 1e-300);

  auto row_lse = [&](std::size_t i) {
    double mx = -kInf;
    for (std::size_t j = 0; j < m; ++j) mx = std::max(mx, (g[j] - c[i * m + j]) / eps_reg);
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += std::exp((g[j] - c[i * m + j]) / eps_reg - mx);
    return mx + std::log(s);
  };
  auto col_lse = [&](std::size_t j) {
    double mx = -kInf;
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, (f[i] - c[i * m + j]) / eps_reg);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp((f[i] - c[i * m + j]) / eps_reg - mx);
    return mx + std::log(s);
  };

  double marg_err = kInf;
  for (int it = 0; it < max_iters && marg_err > 1e-9; ++it) {
    for (std::size_t i = 0; i < n; ++i) f[i] = eps_reg * (loga[i] - row_lse(i));
    for (std::size_t j = 0; j < m; ++j) g[j] = eps_reg * (logb[j] - col_lse(j));
    // rows now off, columns exact; measure row error
    marg_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += std::exp((f[i] + g[j] - c[i * m + j]) / eps_reg);
      marg_err = std::max(marg_err, std::abs(s - mu.weight(i)));
    }
  }
  if (marg_err > 1e-7) throw NotConverged("sinkhorn marginal error above 1e-7");

  // rounding pass so both marginals hold to the stated tolerance
  std::vector<double> p(n * m);
  std::vector<double> row(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      p[i * m + j] = std::exp((f[i] + g[j] - c[i * m + j]) / eps_reg);
      row[i] += p[i * m + j];
    }
  for (std::size_t i = 0; i < n; ++i) {
    double s = row[i] > 0 ? mu.weight(i) / row[i] : 0.0;
    for (std::size_t j = 0; j < m; ++j) p[i * m + j] *= s;
  }

  TransportPlan plan{mu, nu, {}, 0.0, std::move(f), std::move(g), true};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (p[i * m + j] > 1e-16) {
        plan.pairs.push_back({static_cast<int>(i), static_cast<int>(j), p[i * m + j]});
        plan.cost += p[i * m + j] * c[i * m + j];
      }
  return plan;
}

double wasserstein_d2(const DiscreteMeasure& mu, const DiscreteMeasure& nu, bool* used_entropic) {
  if (mu.size() * nu.size() <= kExactSizeCap) {
    if (used_entropic) *used_entropic = false;
    return solve_exact(mu, nu).cost;
  }
  std::vector<double> c = cost_matrix(mu, nu);
  double mean_cost = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
  if (used_entropic) *used_entropic = true;
  return solve_entropic(mu, nu, std::max(1e-3 * mean_cost, 1e-12)).cost;
}

KantorovichPotential kantorovichpotential_impl(const TransportPlan& plan,
                                               const std::vector<Point>& query, const Point& x0) {
  std::size_t np = plan.pairs.size();
  if (np == 0) throw NoSupport("plan support is empty");
  // c-transform of the target dual: psi(x) = max_j beta_j - c(x, y_j).
  // Dual feasibility makes psi(x_i) >= -alpha_i impossible to exceed and
  // complementary slackness attains it, so psi = -alpha on the source atoms.
  auto extend = [&](std::span<const double> x) {
    double best = -kInf;
    for (std::size_t j = 0; j < plan.target.size(); ++j) {
      double v = plan.dual_target[j] - 0.5 * sq_dist(x, plan.target.point(j));
      best = std::max(best, v);
    }
    return best;
  };
  KantorovichPotential out;
  out.base_point = x0;
  double shift = extend(std::span<const double>(x0.data(), x0.size()));
  out.values.reserve(query.size());
  for (const auto& q : query)
    out.values.push_back(extend(std::span<const double>(q.data(), q.size())) - shift);
  return out;
}

KantorovichPotential kantorovich_potential(const TransportPlan& plan,
                                           const std::vector<Point>& query, const Point& x0) {
  double gap = std::abs(plan.duality_gap());
  if (gap > 1e-6 * (1.0 + std::abs(plan.cost)))
    throw PlanNotOptimal("duality gap too large for potential extraction");
  return kantorovichpotential_impl(plan, query, x0);
}

CyclicMonotonicityReport check_cyclic_monotonicity(const TransportPlan& plan, int cycle_len,
                                                   int trials, std::uint64_t rng_seed) {
  if (cycle_len < 2) throw Error("check_cyclic_monotonicity: cycle length must be >= 2");
  if (plan.pairs.empty()) throw NoSupport("plan support is empty");
  Rng rng(rng_seed);
  CyclicMonotonicityReport rep;
  rep.trials = trials;
  std::vector<int> pick(cycle_len);
  for (int t = 0; t < trials; ++t) {
    for (int k = 0; k < cycle_len; ++k)
      pick[k] = static_cast<int>(rng.below(plan.pairs.size()));
    double own = 0.0, shifted = 0.0;
    for (int k = 0; k < cycle_len; ++k) {
      const auto& ek = plan.pairs[pick[k]];
      const auto& en = plan.pairs[pick[(k + 1) % cycle_len]];
      own += sq_dist(plan.source.point(ek.i), plan.target.point(ek.j));
      shifted += sq_dist(plan.source.point(en.i), plan.target.point(ek.j));
    }
    double margin = own - shifted;  // eq (5.1) requires own <= shifted
    if (margin > 1e-9) {
      ++rep.violations;
      rep.worst_margin = std::max(rep.worst_margin, margin);
    }
  }
  return rep;
}

}  // namespace eqm
