#include "eqm/kernel.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <limits>

namespace eqm {

namespace {

constexpr double kPi = 3.14159265358979323846;

// closed form for \int_0^a \int_0^b log r dy dx
double log_rect_primitive(double a, double b) {
  if (a <= 0.0 || b <= 0.0) return 0.0;
  double r2 = a * a + b * b;
  return 0.5 * a * b * std::log(r2) - 1.5 * a * b + 0.5 * a * a * std::atan(b / a) +
         0.5 * b * b * std::atan(a / b);
}

// mean of 1/r over an axis-aligned box centered at the origin, by recursive
// subdivision of the singular octant cell
double riesz_box_average(const std::vector<double>& half, int depth) {
  // midpoint rule on a 4^dim sub-lattice; the sub-box containing the origin
  // is recursed
  int dim = static_cast<int>(half.size());
  const int m = 4;
  std::vector<int> idx(dim, 0);
  double sum = 0.0;
  std::size_t count = 1;
  for (int k = 0; k < dim; ++k) count *= m;
  for (std::size_t c = 0; c < count; ++c) {
    std::size_t rest = c;
    double r2 = 0.0;
    bool central = true;
    std::vector<double> sub_half(dim);
    for (int k = 0; k < dim; ++k) {
      int i = static_cast<int>(rest % m);
      rest /= m;
      double w = 2.0 * half[k] / m;
      double x = -half[k] + (i + 0.5) * w;
      sub_half[k] = 0.5 * w;
      r2 += x * x;
      if (std::abs(x) > 0.51 * w) central = false;
    }
    if (central && depth > 0) {
      sum += riesz_box_average(sub_half, depth - 1);
    } else if (central) {
      // innermost: crude bound, cell is tiny by now
      sum += 2.0 / std::sqrt(sub_half[0] * sub_half[0]);
    } else {
      sum += 1.0 / std::sqrt(r2);
    }
  }
  return sum / static_cast<double>(count);
}

}  // namespace

KernelSpec KernelSpec::riesz(int n, std::optional<double> r0) {
  if (n < 3) throw Error("Riesz kernel requires n >= 3");
  return {KernelKind::Riesz, n, r0};
}

double kernel_eval(const KernelSpec& spec, double r) {
  if (!(r > 0.0)) throw NonpositiveDistance();
  if (spec.truncation_radius && r >= *spec.truncation_radius) return 0.0;
  if (spec.kind == KernelKind::Log2D) return -std::log(r);
  return std::pow(r, 2.0 - static_cast<double>(spec.n));
}

double kernel_cell_average(const KernelSpec& spec, const std::vector<double>& spacing) {
  if (spec.kind == KernelKind::Log2D) {
    if (spacing.size() == 2) {
      double a = 0.5 * spacing[0], b = 0.5 * spacing[1];
      return -4.0 * log_rect_primitive(a, b) / (spacing[0] * spacing[1]);
    }
    if (spacing.size() == 1) {
      // (1/h) int_{-h/2}^{h/2} log(1/|t|) dt = log(2/h) + 1
      return std::log(2.0 / spacing[0]) + 1.0;
    }
    throw DimensionMismatch("Log2D cell average needs a 1D or 2D cell");
  }
  if (spec.n == 3 && spacing.size() == 3) {
    std::vector<double> half = {0.5 * spacing[0], 0.5 * spacing[1], 0.5 * spacing[2]};
    return riesz_box_average(half, 6);
  }
  throw DimensionMismatch("Riesz cell average implemented for n = 3 only");
}

namespace {

double singular_guard(const DiscreteMeasure& mu, std::span<const double> x) {
  double diam = mu.bbox_diameter();
  double far = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) far += x[k] * x[k];
  double scale = std::max(diam, std::sqrt(far));
  if (scale <= 0.0) scale = 1.0;
  return 1e-12 * scale;
}

}  // namespace

double potential(const DiscreteMeasure& mu, std::span<const double> x, const KernelSpec& spec,
                 int* skipped) {
  if (static_cast<int>(x.size()) != mu.dim()) throw DimensionMismatch();
  double delta = singular_guard(mu, x);
  double sum = 0.0;
  int skip = 0;
  int dim = mu.dim();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto p = mu.point(i);
    double r2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      double d = x[k] - p[k];
      r2 += d * d;
    }
    double r = std::sqrt(r2);
    if (r < delta) {
      ++skip;
      continue;
    }
    sum += mu.weight(i) * kernel_eval(spec, r);
  }
  if (skipped) *skipped = skip;
  return sum;
}

std::vector<double> grad_potential(const DiscreteMeasure& mu, std::span<const double> x,
                                   const KernelSpec& spec, int* skipped) {
  if (static_cast<int>(x.size()) != mu.dim()) throw DimensionMismatch();
  double delta = singular_guard(mu, x);
  int dim = mu.dim();
  std::vector<double> g(dim, 0.0);
  int skip = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto p = mu.point(i);
    double r2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      double d = x[k] - p[k];
      r2 += d * d;
    }
    double r = std::sqrt(r2);
    if (r < delta) {
      ++skip;
      continue;
    }
    if (spec.truncation_radius && r >= *spec.truncation_radius) continue;
    double coeff;
    if (spec.kind == KernelKind::Log2D) {
      coeff = -mu.weight(i) / r2;  // d/dx log(1/r) = -(x-xi)/r^2
    } else {
      double n = static_cast<double>(spec.n);
      coeff = mu.weight(i) * (2.0 - n) * std::pow(r, -n);
    }
    for (int k = 0; k < dim; ++k) g[k] += coeff * (x[k] - p[k]);
  }
  if (skipped) *skipped = skip;
  return g;
}

double PotentialField::value_at(std::span<const std::size_t> idx) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < shape.size(); ++k) flat = flat * shape[k] + idx[k];
  return values[flat];
}

namespace {

// Linear convolution of cell masses with the tabulated kernel via zero-padded
// FFT; identical (up to roundoff) to the direct double sum.
std::vector<double> convolve_fft_2d(const std::vector<double>& mass, std::size_t nx,
                                    std::size_t ny, const std::vector<double>& kernel_tab) {
  std::size_t px = 2 * nx, py = 2 * ny;
  std::size_t n = px * py;
  std::vector<std::complex<double>> a(n, 0.0), b(n, 0.0);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) a[i * py + j] = mass[i * ny + j];
  // kernel_tab is indexed by (|di|, |dj|), size nx*ny; wrap symmetrically
  for (std::size_t i = 0; i < px; ++i) {
    std::size_t di = (i < nx) ? i : px - i;
    if (di >= nx) continue;
    for (std::size_t j = 0; j < py; ++j) {
      std::size_t dj = (j < ny) ? j : py - j;
      if (dj >= ny) continue;
      b[i * py + j] = kernel_tab[di * ny + dj];
    }
  }
  fftw_plan pa = fftw_plan_dft_2d(static_cast<int>(px), static_cast<int>(py),
                                  reinterpret_cast<fftw_complex*>(a.data()),
                                  reinterpret_cast<fftw_complex*>(a.data()), FFTW_FORWARD,
                                  FFTW_ESTIMATE);
  fftw_plan pb = fftw_plan_dft_2d(static_cast<int>(px), static_cast<int>(py),
                                  reinterpret_cast<fftw_complex*>(b.data()),
                                  reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                                  FFTW_ESTIMATE);
  fftw_execute(pa);
  fftw_execute(pb);
  for (std::size_t i = 0; i < n; ++i) a[i] *= b[i];
  fftw_plan pc = fftw_plan_dft_2d(static_cast<int>(px), static_cast<int>(py),
                                  reinterpret_cast<fftw_complex*>(a.data()),
                                  reinterpret_cast<fftw_complex*>(a.data()), FFTW_BACKWARD,
                                  FFTW_ESTIMATE);
  fftw_execute(pc);
  fftw_destroy_plan(pa);
  fftw_destroy_plan(pb);
  fftw_destroy_plan(pc);
  std::vector<double> out(nx * ny);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      out[i * ny + j] = a[i * py + j].real() / static_cast<double>(n);
  return out;
}

}  // namespace

PotentialField potential_field_on_grid(const GridDensity& rho, const KernelSpec& spec) {
  int dim = rho.dim();
  if (spec.kind == KernelKind::Log2D) {
    if (dim != 2) throw DimensionMismatch("Log2D field needs a 2D grid");
  } else if (spec.n != dim) {
    throw DimensionMismatch("Riesz(n) field needs an n-dimensional grid");
  }
  const auto& shape = rho.shape();
  const auto& h = rho.spacing();
  double vol = rho.cell_volume();
  double self_avg = kernel_cell_average(spec, h);

  PotentialField field;
  field.origin = rho.origin();
  field.spacing = h;
  field.shape = shape;

  if (dim == 2) {
    std::size_t nx = shape[0], ny = shape[1];
    std::vector<double> mass(nx * ny);
    for (std::size_t c = 0; c < mass.size(); ++c) mass[c] = rho.cells()[c] * vol;
    std::vector<double> tab(nx * ny);
    for (std::size_t di = 0; di < nx; ++di) {
      for (std::size_t dj = 0; dj < ny; ++dj) {
        if (di == 0 && dj == 0) {
          tab[0] = self_avg;
        } else {
          double r = std::hypot(di * h[0], dj * h[1]);
          tab[di * ny + dj] = kernel_eval(spec, r);
        }
      }
    }
    field.values = convolve_fft_2d(mass, nx, ny, tab);
  } else {
    // direct sum (1D / 3D); sources are nonzero cells only
    std::size_t total = rho.n_cells();
    std::vector<std::size_t> src;
    for (std::size_t c = 0; c < total; ++c)
      if (rho.cells()[c] != 0.0) src.push_back(c);
    field.values.assign(total, 0.0);
    std::vector<std::size_t> strides(dim, 1);
    for (int k = dim - 2; k >= 0; --k) strides[k] = strides[k + 1] * shape[k + 1];
    for (std::size_t t = 0; t < total; ++t) {
      double u = 0.0;
      for (std::size_t s : src) {
        double m = rho.cells()[s] * vol;
        if (s == t) {
          u += m * self_avg;
          continue;
        }
        double r2 = 0.0;
        std::size_t a = t, b = s;
        for (int k = 0; k < dim; ++k) {
          long ia = static_cast<long>(a / strides[k]), ib = static_cast<long>(b / strides[k]);
          a %= strides[k];
          b %= strides[k];
          double d = (ia - ib) * h[k];
          r2 += d * d;
        }
        u += m * kernel_eval(spec, std::sqrt(r2));
      }
      field.values[t] = u;
    }
  }

  // centered differences; one-sided at the boundary
  field.gradient.assign(dim, std::vector<double>(field.values.size(), 0.0));
  std::vector<std::size_t> strides(dim, 1);
  for (int k = dim - 2; k >= 0; --k) strides[k] = strides[k + 1] * shape[k + 1];
  for (std::size_t t = 0; t < field.values.size(); ++t) {
    std::size_t rest = t;
    std::vector<std::size_t> idx(dim);
    for (int k = 0; k < dim; ++k) {
      idx[k] = rest / strides[k];
      rest %= strides[k];
    }
    for (int k = 0; k < dim; ++k) {
      std::size_t lo = idx[k] > 0 ? t - strides[k] : t;
      std::size_t hi = idx[k] + 1 < shape[k] ? t + strides[k] : t;
      double span = static_cast<double>((hi - lo) / strides[k]) * h[k];
      field.gradient[k][t] =
          span > 0.0 ? (field.values[hi] - field.values[lo]) / span : 0.0;
    }
  }
  return field;
}

double truncated_kernel_fourier(double xi_norm, double r0, double c1) {
  if (!(r0 > 0.0)) throw Error("truncated_kernel_fourier: r0 must be positive");
  if (!(xi_norm > 0.0)) throw ZeroFrequency();
  double t = 2.0 * kPi * r0 * xi_norm;
  double one_minus_b;
  if (t < 1e-3) {
    double t2 = t * t;
    one_minus_b = t2 / 4.0 - t2 * t2 / 64.0;  // 1 - J0 series
  } else {
    one_minus_b = 1.0 - std::cyl_bessel_j(0.0, t);
  }
  return c1 / (4.0 * kPi * xi_norm * xi_norm) * one_minus_b;
}

double support_diameter(const GridDensity& rho, double rel_threshold) {
  double peak = 0.0;
  for (double c : rho.cells()) peak = std::max(peak, c);
  double thr = peak * rel_threshold;
  int dim = rho.dim();
  const auto& shape = rho.shape();
  std::vector<std::size_t> strides(dim, 1);
  for (int k = dim - 2; k >= 0; --k) strides[k] = strides[k + 1] * shape[k + 1];
  if (dim == 2) {
    // Exact max pairwise distance. The maximizing pair lies on the convex
    // hull, and every hull vertex is a row extreme or a column extreme, so
    // it suffices to scan those O(nx + ny) cells.
    std::size_t nx = shape[0], ny = shape[1];
    std::vector<std::pair<double, double>> ext;
    std::vector<long> row_lo(nx, -1), row_hi(nx, -1), col_lo(ny, -1), col_hi(ny, -1);
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 0; j < ny; ++j) {
        if (rho.cells()[i * ny + j] <= thr) continue;
        long jj = static_cast<long>(j), ii = static_cast<long>(i);
        if (row_lo[i] < 0) row_lo[i] = jj;
        row_hi[i] = jj;
        if (col_lo[j] < 0) col_lo[j] = ii;
        col_hi[j] = ii;
      }
    }
    for (std::size_t i = 0; i < nx; ++i) {
      if (row_lo[i] < 0) continue;
      ext.push_back({i * rho.spacing()[0], row_lo[i] * rho.spacing()[1]});
      ext.push_back({i * rho.spacing()[0], row_hi[i] * rho.spacing()[1]});
    }
    for (std::size_t j = 0; j < ny; ++j) {
      if (col_lo[j] < 0) continue;
      ext.push_back({col_lo[j] * rho.spacing()[0], j * rho.spacing()[1]});
      ext.push_back({col_hi[j] * rho.spacing()[0], j * rho.spacing()[1]});
    }
    if (ext.empty()) return 0.0;
    double best2 = 0.0;
    for (std::size_t p = 0; p < ext.size(); ++p) {
      for (std::size_t q = p + 1; q < ext.size(); ++q) {
        double dx = ext[p].first - ext[q].first, dy = ext[p].second - ext[q].second;
        best2 = std::max(best2, dx * dx + dy * dy);
      }
    }
    return std::sqrt(best2);
  }
  // other dimensions: bounding-box diagonal (an upper bound)
  double d2 = 0.0;
  for (int k = 0; k < dim; ++k) {
    long lo = std::numeric_limits<long>::max(), hi = -1;
    for (std::size_t c = 0; c < rho.n_cells(); ++c) {
      if (rho.cells()[c] <= thr) continue;
      long i = static_cast<long>((c / strides[k]) % shape[k]);
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
    if (hi < 0) return 0.0;
    double ext = static_cast<double>(hi - lo) * rho.spacing()[k];
    d2 += ext * ext;
  }
  return std::sqrt(d2);
}

FourierEnergy fourier_energy_detail(const GridDensity& rho, double r0, double c1) {
  if (rho.dim() != 2) throw DimensionMismatch("fourier_energy needs a 2D grid");
  if (!(r0 > 0.0)) throw Error("fourier_energy: r0 must be positive");
  double diam = support_diameter(rho);
  if (diam > r0) throw SupportTooLarge("support diameter exceeds truncation radius");
  const auto& shape = rho.shape();
  const auto& h = rho.spacing();
  double Lx = shape[0] * h[0], Ly = shape[1] * h[1];
  if (Lx < r0 + diam || Ly < r0 + diam)
    throw SupportTooLarge("grid box too small for the truncation radius (kernel wrap)");

  std::size_t nx = shape[0], ny = shape[1];
  double vol = rho.cell_volume();
  std::vector<std::complex<double>> a(nx * ny);
  for (std::size_t c = 0; c < a.size(); ++c) a[c] = rho.cells()[c] * vol;
  fftw_plan p = fftw_plan_dft_2d(static_cast<int>(nx), static_cast<int>(ny),
                                 reinterpret_cast<fftw_complex*>(a.data()),
                                 reinterpret_cast<fftw_complex*>(a.data()), FFTW_FORWARD,
                                 FFTW_ESTIMATE);
  fftw_execute(p);
  fftw_destroy_plan(p);

  double mass = rho.mass();
  double dc_limit = c1 * kPi * r0 * r0 / 4.0;  // lim_{xi->0} K_hat
  double sum = 0.0;
  double dxi = 1.0 / (Lx * Ly);
  for (std::size_t i = 0; i < nx; ++i) {
    double fx = (i <= nx / 2) ? static_cast<double>(i) : static_cast<double>(i) - nx;
    fx /= Lx;
    for (std::size_t j = 0; j < ny; ++j) {
      double fy = (j <= ny / 2) ? static_cast<double>(j) : static_cast<double>(j) - ny;
      fy /= Ly;
      double xi = std::hypot(fx, fy);
      double khat = (xi == 0.0) ? dc_limit : truncated_kernel_fourier(xi, r0, c1);
      sum += std::norm(a[i * ny + j]) * khat * dxi;
    }
  }
  FourierEnergy out;
  out.spectral_sum = sum;
  out.energy = sum - 0.5 * c1 * std::log(r0) * mass * mass;
  return out;
}

}  // namespace eqm
