// Python bindings for the main operations: energies, optimal transport,
// the equilibrium solver, and the log-gas sampler.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "eqm/energy.hpp"
#include "eqm/gas.hpp"
#include "eqm/kernel.hpp"
#include "eqm/solver.hpp"
#include "eqm/transport.hpp"

namespace py = pybind11;
using namespace eqm;

namespace {

DiscreteMeasure measure_from_arrays(py::array_t<double, py::array::c_style> points,
                                    py::array_t<double, py::array::c_style> weights) {
  auto pbuf = points.unchecked<2>();
  auto wbuf = weights.unchecked<1>();
  if (pbuf.shape(0) != wbuf.shape(0))
    throw py::value_error("points and weights must have the same length");
  std::vector<Point> pts;
  std::vector<double> w;
  pts.reserve(static_cast<std::size_t>(pbuf.shape(0)));
  for (py::ssize_t i = 0; i < pbuf.shape(0); ++i) {
    Point p;
    for (py::ssize_t k = 0; k < pbuf.shape(1); ++k) p.push_back(pbuf(i, k));
    pts.push_back(std::move(p));
    w.push_back(wbuf(i));
  }
  return DiscreteMeasure(std::move(pts), std::move(w));
}

GridDensity grid_from_array(py::array_t<double, py::array::c_style> cells,
                            std::vector<double> origin, std::vector<double> spacing) {
  auto buf = cells.unchecked<2>();
  std::vector<std::size_t> shape = {static_cast<std::size_t>(buf.shape(0)),
                                    static_cast<std::size_t>(buf.shape(1))};
  std::vector<double> data(shape[0] * shape[1]);
  for (std::size_t i = 0; i < shape[0]; ++i)
    for (std::size_t j = 0; j < shape[1]; ++j) data[i * shape[1] + j] = buf(i, j);
  return GridDensity(Point(origin.begin(), origin.end()), spacing, shape, std::move(data));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Equilibrium-measure toolkit: energies, transport, solver, log gas";

  m.def(
      "interaction_energy",
      [](py::array_t<double, py::array::c_style> points,
         py::array_t<double, py::array::c_style> weights) {
        return interaction_energy(measure_from_arrays(points, weights), KernelSpec::log2d());
      },
      py::arg("points"), py::arg("weights"),
      "Off-diagonal log-kernel interaction energy of a weighted point cloud.");

  m.def(
      "fourier_energy",
      [](py::array_t<double, py::array::c_style> cells, std::vector<double> origin,
         std::vector<double> spacing, double r0) {
        return fourier_energy(grid_from_array(cells, origin, spacing), r0);
      },
      py::arg("cells"), py::arg("origin"), py::arg("spacing"), py::arg("r0"),
      "Spectral interaction energy of a compactly supported 2D grid density.");

  m.def(
      "wasserstein_d2",
      [](py::array_t<double, py::array::c_style> xp,
         py::array_t<double, py::array::c_style> xw,
         py::array_t<double, py::array::c_style> yp,
         py::array_t<double, py::array::c_style> yw) {
        return wasserstein_d2(measure_from_arrays(xp, xw), measure_from_arrays(yp, yw));
      },
      py::arg("x_points"), py::arg("x_weights"), py::arg("y_points"), py::arg("y_weights"),
      "Squared 2-Wasserstein distance with the half squared-distance cost.");

  m.def(
      "solve_transport",
      [](py::array_t<double, py::array::c_style> xp,
         py::array_t<double, py::array::c_style> xw,
         py::array_t<double, py::array::c_style> yp,
         py::array_t<double, py::array::c_style> yw) {
        TransportPlan plan =
            solve_exact(measure_from_arrays(xp, xw), measure_from_arrays(yp, yw));
        py::list pairs;
        for (const auto& e : plan.pairs) pairs.append(py::make_tuple(e.i, e.j, e.mass));
        py::dict out;
        out["cost"] = plan.cost;
        out["pairs"] = pairs;
        out["dual_source"] = plan.dual_source;
        out["dual_target"] = plan.dual_target;
        return out;
      },
      py::arg("x_points"), py::arg("x_weights"), py::arg("y_points"), py::arg("y_weights"),
      "Exact optimal transport plan, cost, and dual potentials.");

  m.def(
      "minimize_1d",
      [](std::vector<double> candidates, std::vector<double> target_points,
         std::vector<double> target_weights, double tol_el) {
        SolverConfig cfg;
        cfg.dim = 1;
        cfg.candidate_coords = std::move(candidates);
        cfg.tol_el = tol_el;
        std::vector<Point> tp;
        for (double x : target_points) tp.push_back({x});
        DiscreteMeasure rho0(tp, target_weights);
        EquilibriumResult res = minimize(rho0, cfg);
        py::dict out;
        std::vector<double> xs, ws;
        for (std::size_t i = 0; i < res.measure.size(); ++i) {
          xs.push_back(res.measure.point(i)[0]);
          ws.push_back(res.measure.weight(i));
        }
        out["x"] = xs;
        out["weights"] = ws;
        out["lambda"] = res.lambda_hat;
        out["interaction"] = res.energy.interaction;
        out["transport"] = res.energy.transport;
        out["total"] = res.energy.total;
        out["max_support_dev"] = res.el_report.max_support_dev;
        return out;
      },
      py::arg("candidates"), py::arg("target_points"), py::arg("target_weights"),
      py::arg("tol_el") = 1e-6,
      "Minimize the interaction-plus-transport energy over a 1D candidate grid.");

  m.def(
      "sample_gas",
      [](int n, double g, int sweeps, int burn_in, std::uint64_t seed) {
        GasConfig cfg;
        cfg.n_particles = n;
        cfg.g = g;
        cfg.sweeps = sweeps;
        cfg.burn_in = burn_in;
        cfg.rng_seed = seed;
        GasSamples s = sample_gas(cfg);
        py::dict out;
        out["positions"] = s.positions;
        out["acceptance_rate"] = s.acceptance_rate;
        return out;
      },
      py::arg("n"), py::arg("g"), py::arg("sweeps") = 1000, py::arg("burn_in") = 500,
      py::arg("seed") = 0,
      "Metropolis samples of the quadratically confined log gas.");

  m.def("semicircle_density", &semicircle_density_normalized, py::arg("x"), py::arg("g"),
        "Normalized semicircle equilibrium density.");
  m.def("semicircle_cdf", &semicircle_cdf, py::arg("x"), py::arg("g"));
  m.def("ks_statistic", &ks_statistic, py::arg("values"), py::arg("g"),
        "KS distance of pooled samples to the normalized semicircle.");
}
