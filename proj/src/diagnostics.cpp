#include "eqm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace eqm {

namespace {

constexpr double kPi = 3.14159265358979323846;

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile_of(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

double field_value_at(const PotentialField& f, std::span<const double> x) {
  int dim = static_cast<int>(f.shape.size());
  std::vector<double> t(dim);
  std::vector<std::size_t> i0(dim);
  for (int k = 0; k < dim; ++k) {
    double u = (x[k] - f.origin[k]) / f.spacing[k] - 0.5;  // cell-center coords
    double cl = std::clamp(u, 0.0, static_cast<double>(f.shape[k] - 1));
    i0[k] = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(cl))), f.shape[k] - 2);
    if (f.shape[k] == 1) i0[k] = 0;
    t[k] = f.shape[k] == 1 ? 0.0 : std::clamp(cl - static_cast<double>(i0[k]), 0.0, 1.0);
  }
  std::vector<std::size_t> strides(dim, 1);
  for (int k = dim - 2; k >= 0; --k) strides[k] = strides[k + 1] * f.shape[k + 1];
  double acc = 0.0;
  for (int corner = 0; corner < (1 << dim); ++corner) {
    double wgt = 1.0;
    std::size_t flat = 0;
    for (int k = 0; k < dim; ++k) {
      bool hi = corner & (1 << k);
      wgt *= hi ? t[k] : 1.0 - t[k];
      flat += (i0[k] + (hi && f.shape[k] > 1 ? 1 : 0)) * strides[k];
    }
    acc += wgt * f.values[flat];
  }
  return acc;
}

std::vector<double> field_gradient_at(const PotentialField& f, std::span<const double> x) {
  int dim = static_cast<int>(f.shape.size());
  std::vector<double> t(dim);
  std::vector<std::size_t> i0(dim);
  for (int k = 0; k < dim; ++k) {
    double u = (x[k] - f.origin[k]) / f.spacing[k] - 0.5;
    double cl = std::clamp(u, 0.0, static_cast<double>(f.shape[k] - 1));
    i0[k] = f.shape[k] == 1
                ? 0
                : std::min(static_cast<std::size_t>(std::max(0.0, std::floor(cl))),
                           f.shape[k] - 2);
    t[k] = f.shape[k] == 1 ? 0.0 : std::clamp(cl - static_cast<double>(i0[k]), 0.0, 1.0);
  }
  std::vector<std::size_t> strides(dim, 1);
  for (int k = dim - 2; k >= 0; --k) strides[k] = strides[k + 1] * f.shape[k + 1];
  std::vector<double> g(dim, 0.0);
  for (int axis = 0; axis < dim; ++axis) {
    double acc = 0.0;
    for (int corner = 0; corner < (1 << dim); ++corner) {
      double wgt = 1.0;
      std::size_t flat = 0;
      for (int k = 0; k < dim; ++k) {
        bool hi = corner & (1 << k);
        wgt *= hi ? t[k] : 1.0 - t[k];
        flat += (i0[k] + (hi && f.shape[k] > 1 ? 1 : 0)) * strides[k];
      }
      acc += wgt * f.gradient[axis][flat];
    }
    g[axis] = acc;
  }
  return g;
}

ComplementarityReport complementarity_report(const EquilibriumResult& res,
                                             const KantorovichPotential& psi, double off_tol) {
  const DiscreteMeasure& mu = res.measure;
  KernelSpec spec = KernelSpec::log2d();
  bool consistent = res.potential_at_atoms.size() == mu.size();
  std::vector<double> two_u(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    two_u[i] = 2.0 * (consistent ? res.potential_at_atoms[i]
                                 : potential(mu, mu.point(i), spec));

  std::vector<double> diffs;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.weight(i) > 0.0) diffs.push_back(two_u[i] - psi.values[i]);
  if (diffs.empty()) throw NoSupport();

  ComplementarityReport rep;
  rep.c_shift = median_of(diffs);
  rep.off_support_min = std::numeric_limits<double>::infinity();
  bool any_off = false;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double dev = two_u[i] - psi.values[i] - rep.c_shift;
    if (mu.weight(i) > 0.0) {
      rep.max_weighted = std::max(rep.max_weighted, mu.weight(i) * std::abs(dev));
    } else {
      any_off = true;
      rep.off_support_min = std::min(rep.off_support_min, dev);
    }
  }
  if (!any_off) rep.off_support_min = 0.0;
  rep.off_support_ok = rep.off_support_min >= -off_tol;
  return rep;
}

double transport_map_residual(const EquilibriumResult& res, const KernelSpec& spec) {
  const DiscreteMeasure& mu = res.measure;
  std::vector<double> bary = res.plan.barycentric_targets();
  int dim = mu.dim();
  double worst = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) <= 0.0) continue;
    any = true;
    std::vector<double> g = grad_potential(mu, mu.point(i), spec);
    double r2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      double d = bary[i * dim + k] - mu.point(i)[k] - 2.0 * g[k];
      r2 += d * d;
    }
    worst = std::max(worst, std::sqrt(r2));
  }
  if (!any) throw NoSupport();
  return worst;
}

double transport_map_residual(const EquilibriumResult& res, const PotentialField& u_field) {
  const DiscreteMeasure& mu = res.measure;
  std::vector<double> bary = res.plan.barycentric_targets();
  int dim = mu.dim();
  double worst = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) <= 0.0) continue;
    any = true;
    std::vector<double> g = field_gradient_at(u_field, mu.point(i));
    double r2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      double d = bary[i * dim + k] - mu.point(i)[k] - 2.0 * g[k];
      r2 += d * d;
    }
    worst = std::max(worst, std::sqrt(r2));
  }
  if (!any) throw NoSupport();
  return worst;
}

MaStats monge_ampere_residual(const PotentialField& u_field, const GridDensity& rho,
                              const GridDensity& rho0, double support_cut) {
  if (rho.dim() != 2 || u_field.shape.size() != 2) throw NotTwoDimensional();
  std::size_t nx = rho.shape()[0], ny = rho.shape()[1];
  double hx = rho.spacing()[0], hy = rho.spacing()[1];

  // rho0 as an interpolable field for evaluation at mapped points
  PotentialField rho0_field;
  rho0_field.origin = rho0.origin();
  rho0_field.spacing = rho0.spacing();
  rho0_field.shape = rho0.shape();
  rho0_field.values = rho0.cells();

  auto uat = [&](std::size_t i, std::size_t j) { return u_field.values[i * ny + j]; };
  MaStats out;
  std::vector<double> res_ma, res_alt;
  for (std::size_t i = 1; i + 1 < nx; ++i) {
    for (std::size_t j = 1; j + 1 < ny; ++j) {
      double rho_x = rho[i * ny + j];
      if (rho_x <= support_cut) continue;
      ++out.interior_cells;
      double uxx = (uat(i + 1, j) - 2.0 * uat(i, j) + uat(i - 1, j)) / (hx * hx);
      double uyy = (uat(i, j + 1) - 2.0 * uat(i, j) + uat(i, j - 1)) / (hy * hy);
      double uxy = (uat(i + 1, j + 1) - uat(i + 1, j - 1) - uat(i - 1, j + 1) +
                    uat(i - 1, j - 1)) /
                   (4.0 * hx * hy);
      double m11 = 2.0 * uxx, m22 = 2.0 * uyy, m12 = 2.0 * uxy;
      double x = rho.center(0, i), y = rho.center(1, j);
      double gx = u_field.gradient[0][i * ny + j], gy = u_field.gradient[1][i * ny + j];
      double tx[2] = {x + 2.0 * gx, y + 2.0 * gy};
      bool inside = true;
      for (int k = 0; k < 2; ++k) {
        double lo = rho0.origin()[k];
        double hi = lo + static_cast<double>(rho0.shape()[k]) * rho0.spacing()[k];
        if (tx[k] < lo || tx[k] > hi) inside = false;
      }
      double r0t =
          inside ? field_value_at(rho0_field, std::span<const double>(tx, 2)) : 0.0;
      if (r0t <= 1e-12) {
        ++out.excluded;  // rho0 vanishes at the mapped point; excluded from stats
        continue;
      }
      double det_ma = (1.0 + m11) * (1.0 + m22) - m12 * m12;
      res_ma.push_back(std::abs(det_ma * r0t - rho_x));
      double c = 1.0 + 1.0 / (4.0 * kPi * r0t);
      double det_alt = (m11 + c) * (m22 + c) - m12 * m12;
      res_alt.push_back(r0t * std::abs(det_alt - (c * c - 1.0)));
    }
  }
  if (res_ma.empty()) throw TargetVanishes("no interior support cells with rho0 > 0");
  out.median = median_of(res_ma);
  out.p90 = quantile_of(res_ma, 0.9);
  out.alt_median = median_of(res_alt);
  out.alt_p90 = quantile_of(res_alt, 0.9);
  double denom = std::max(out.median, out.alt_median);
  out.agreement = denom > 0.0 ? std::abs(out.median - out.alt_median) / denom : 0.0;
  return out;
}

namespace {

std::vector<std::vector<double>> sample_directions(int dim) {
  std::vector<std::vector<double>> dirs;
  if (dim == 1) {
    dirs.push_back({1.0});
  } else if (dim == 2) {
    for (int k = 0; k < 720; ++k) {
      double th = kPi * static_cast<double>(k) / 720.0;
      dirs.push_back({std::cos(th), std::sin(th)});
    }
  } else {
    // Fibonacci sphere, antipodes identified
    int m = 2000;
    double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    for (int k = 0; k < m; ++k) {
      double z = 1.0 - 2.0 * (k + 0.5) / static_cast<double>(m);
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double th = 2.0 * kPi * static_cast<double>(k) / golden;
      dirs.push_back({r * std::cos(th), r * std::sin(th), z});
    }
  }
  return dirs;
}

}  // namespace

double slab_width(const std::vector<Point>& points, const Ball& b) {
  std::vector<const Point*> inside;
  for (const auto& p : points)
    if (b.contains(std::span<const double>(p.data(), p.size()))) inside.push_back(&p);
  if (inside.empty()) throw EmptyBall();
  int dim = static_cast<int>(inside.front()->size());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& u : sample_directions(dim)) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Point* p : inside) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += (*p)[k] * u[k];
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    best = std::min(best, hi - lo);
  }
  return best;
}

std::vector<std::pair<double, double>> omega_of_R(const std::vector<Point>& points,
                                                  const std::vector<Point>& centers,
                                                  std::vector<double> r_list) {
  std::sort(r_list.begin(), r_list.end());
  std::vector<std::pair<double, double>> table;
  double running = 0.0;
  double prev_r = 0.0;
  for (double r_cap : r_list) {
    for (int level = 0; level < 8; ++level) {
      double r = r_cap * std::pow(2.0, -level);
      if (r <= prev_r) break;  // ladder already covered by smaller caps
      for (const auto& c : centers) {
        try {
          running = std::max(running, slab_width(points, Ball(c, r)) / r);
        } catch (const EmptyBall&) {
        }
      }
    }
    prev_r = r_cap;
    table.emplace_back(r_cap, running);
  }
  return table;
}

std::vector<std::size_t> singular_point_labels(const EquilibriumResult& res, double h,
                                               const KernelSpec& spec) {
  const DiscreteMeasure& mu = res.measure;
  std::vector<double> bary = res.plan.barycentric_targets();
  int dim = mu.dim();

  // local density = mass within 2h over the ball volume; compared to the mean
  double ball_vol = dim == 1 ? 4.0 * h
                    : dim == 2 ? kPi * 4.0 * h * h
                               : 4.0 / 3.0 * kPi * 8.0 * h * h * h;
  std::vector<double> local(mu.size(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < mu.size(); ++j) {
      double r2 = 0.0;
      for (int k = 0; k < dim; ++k) {
        double d = mu.point(i)[k] - mu.point(j)[k];
        r2 += d * d;
      }
      if (r2 <= 4.0 * h * h) local[i] += mu.weight(j);
    }
    local[i] /= ball_vol;
  }
  double mean = std::accumulate(local.begin(), local.end(), 0.0) /
                static_cast<double>(mu.size());

  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double fix2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      double d = bary[i * dim + k] - mu.point(i)[k];
      fix2 += d * d;
    }
    if (std::sqrt(fix2) > 3.0 * h) continue;
    std::vector<double> g = grad_potential(mu, mu.point(i), spec);
    double g2 = 0.0;
    for (double v : g) g2 += v * v;
    if (std::sqrt(g2) > 3.0 * h) continue;
    if (local[i] > 0.05 * mean) continue;
    labels.push_back(i);
  }
  return labels;
}

}  // namespace eqm
