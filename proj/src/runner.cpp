#include "eqm/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "eqm/diagnostics.hpp"
#include "eqm/energy.hpp"
#include "eqm/flow.hpp"
#include "eqm/gas.hpp"
#include "eqm/io.hpp"
#include "eqm/solver.hpp"

namespace eqm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

double jget(const json& j, const char* key, double dflt) {
  return j.contains(key) ? j.at(key).get<double>() : dflt;
}
int jgeti(const json& j, const char* key, int dflt) {
  return j.contains(key) ? j.at(key).get<int>() : dflt;
}

DiscreteMeasure target_from_config(const json& t, int dim) {
  std::string type = t.at("type").get<std::string>();
  if (type == "dirac") {
    Point p = t.at("point").get<Point>();
    if (static_cast<int>(p.size()) != dim) throw ConfigParse("target point arity");
    return DiscreteMeasure(p, {1.0}, dim);
  }
  if (type == "csv") return read_measure_csv(t.at("path").get<std::string>());
  throw ConfigParse("unknown target type: " + type);
}

void write_manifest(const std::string& out_dir, const json& scenario, double wall_time) {
  json m;
  m["version"] = kVersion;
  m["kind"] = scenario.at("kind");
  m["seed"] = scenario.contains("seed") ? scenario.at("seed").get<std::uint64_t>() : 0u;
  m["scenario"] = scenario;
  m["config_hash"] = fnv1a(scenario.dump());
  m["wall_time"] = wall_time;  // excluded from reproducibility comparison
  write_text_file(out_dir + "/manifest.json", m.dump(2) + "\n");
}

RunOutcome run_equilibrium(const json& sc, const std::string& out) {
  const json& grid = sc.at("grid");
  double lo = grid.at("min").get<double>(), hi = grid.at("max").get<double>();
  int count = grid.at("count").get<int>();
  SolverConfig cfg;
  cfg.dim = 1;
  cfg.candidate_coords.resize(count);
  for (int i = 0; i < count; ++i)
    cfg.candidate_coords[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  cfg.tol_el = jget(sc, "tol_el", 1e-6);
  cfg.max_outer = jgeti(sc, "max_outer", 20);
  cfg.max_inner = jgeti(sc, "max_inner", 400);
  cfg.rng_seed = sc.contains("seed") ? sc.at("seed").get<std::uint64_t>() : 0u;
  DiscreteMeasure rho0 = target_from_config(sc.at("target"), 1);

  EquilibriumResult res = minimize(rho0, cfg);
  write_measure_csv(out + "/weights.csv", res.measure);
  write_plan_csv(out + "/plan.csv", res.plan);
  write_duals_csv(out + "/duals.csv", res.plan);
  write_energy_json(out + "/energy.json", res.energy);

  json el;
  el["lambda_hat"] = res.el_report.lambda_hat;
  el["max_support_dev"] = res.el_report.max_support_dev;
  el["support_stddev"] = res.el_report.support_stddev;
  el["min_mon_value"] = res.el_report.min_mon_value;
  el["mon_violations"] = res.el_report.mon_violations;
  el["probes"] = res.el_report.probes;
  write_text_file(out + "/el_report.json", el.dump(2) + "\n");

  RunOutcome rc;
  double thr = jget(sc, "el_threshold", 1e-3);
  if (res.el_report.max_support_dev > thr || res.el_report.mon_violations > 0) {
    rc.exit_code = 2;
    rc.messages.push_back("Euler-Lagrange residual above threshold");
  }
  return rc;
}

RunOutcome run_flow(const json& sc, const std::string& out) {
  const json& g = sc.at("grid");
  Point origin = g.at("origin").get<Point>();
  std::vector<double> spacing = g.at("spacing").get<std::vector<double>>();
  std::vector<std::size_t> shape = g.at("shape").get<std::vector<std::size_t>>();
  double sigma = jget(sc.at("blob"), "sigma", 0.25);
  Point center = sc.at("blob").contains("center")
                     ? sc.at("blob").at("center").get<Point>()
                     : Point(2, 0.0);
  std::vector<double> cells(shape[0] * shape[1]);
  for (std::size_t i = 0; i < shape[0]; ++i)
    for (std::size_t j = 0; j < shape[1]; ++j) {
      double x = origin[0] + spacing[0] * (i + 0.5) - center[0];
      double y = origin[1] + spacing[1] * (j + 0.5) - center[1];
      cells[i * shape[1] + j] = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
    }
  FlowState state = flow_init(GridDensity(origin, spacing, shape, std::move(cells)),
                              /*dt=*/0.0, jget(sc, "tau", 1.0));
  state.dt = jget(sc, "dt_factor", 0.5) * flow_dt_max(state);
  int steps = jgeti(sc, "steps", 50);
  double mass0 = state.density.mass();
  for (int s = 0; s < steps; ++s) state = flow_step(state);
  double mass1 = state.density.mass();

  write_pairs_csv(out + "/energy_history.csv", "t,interaction_energy", state.energy_history);
  write_grid_json(out + "/final_density.json", state.density);
  DissipationReport rep = dissipation_check(state);
  json d;
  d["max_rel_mismatch"] = rep.max_rel_mismatch;
  d["max_energy_increase"] = rep.max_energy_increase;
  d["steps"] = rep.steps;
  d["mass_drift"] = std::abs(mass1 - mass0);
  d["pass"] = rep.pass && std::abs(mass1 - mass0) <= 1e-10;
  write_text_file(out + "/dissipation.json", d.dump(2) + "\n");

  RunOutcome rc;
  if (!d["pass"].get<bool>()) {
    rc.exit_code = 2;
    rc.messages.push_back("flow dissipation/mass check failed");
  }
  return rc;
}

RunOutcome run_gas(const json& sc, const std::string& out) {
  GasConfig cfg;
  cfg.n_particles = jgeti(sc, "n", 64);
  cfg.g = jget(sc, "g", 2.0);
  cfg.sweeps = jgeti(sc, "sweeps", 2000);
  cfg.burn_in = jgeti(sc, "burn_in", 500);
  cfg.rng_seed = sc.contains("seed") ? sc.at("seed").get<std::uint64_t>() : 0u;
  GasSamples s = sample_gas(cfg);

  std::ostringstream rows;
  for (std::size_t r = 0; r * cfg.n_particles < s.positions.size(); ++r) {
    for (int i = 0; i < cfg.n_particles; ++i) {
      if (i) rows << ",";
      rows << format_double(s.positions[r * cfg.n_particles + i]);
    }
    rows << "\n";
  }
  write_text_file(out + "/samples.csv", rows.str());

  double radius = std::sqrt(2.0 / cfg.g);
  double emp_radius = 0.0;
  for (double x : s.positions) emp_radius = std::max(emp_radius, std::abs(x));
  double ks = s.positions.size() >= 10000 ? histogram_compare(s, cfg.g) : -1.0;
  double ks_thr = jget(sc, "ks_threshold", 0.05);
  bool pass = ks >= 0.0 && ks <= ks_thr && std::abs(emp_radius - radius) <= 0.15 * radius &&
              !s.acceptance_flagged;
  json rep;
  rep["ks"] = ks;
  rep["ks_threshold"] = ks_thr;
  rep["acceptance_rate"] = s.acceptance_rate;
  rep["empirical_radius"] = emp_radius;
  rep["target_radius"] = radius;
  rep["pass"] = pass;
  write_text_file(out + "/gas_report.json", rep.dump(2) + "\n");

  RunOutcome rc;
  if (!pass) {
    rc.exit_code = 2;
    rc.messages.push_back("gas statistics outside thresholds");
  }
  return rc;
}

RunOutcome run_diagnostics(const json& sc, const std::string& out) {
  RunOutcome rc = run_equilibrium(sc, out);
  // re-run the solve to analyze (cheap at CLI scale, keeps run_equilibrium simple)
  const json& grid = sc.at("grid");
  double lo = grid.at("min").get<double>(), hi = grid.at("max").get<double>();
  int count = grid.at("count").get<int>();
  SolverConfig cfg;
  cfg.dim = 1;
  cfg.candidate_coords.resize(count);
  for (int i = 0; i < count; ++i)
    cfg.candidate_coords[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  cfg.tol_el = jget(sc, "tol_el", 1e-6);
  cfg.rng_seed = sc.contains("seed") ? sc.at("seed").get<std::uint64_t>() : 0u;
  DiscreteMeasure rho0 = target_from_config(sc.at("target"), 1);
  EquilibriumResult res = minimize(rho0, cfg);

  std::vector<Point> query;
  Point x0;
  for (std::size_t i = 0; i < res.measure.size(); ++i) {
    query.emplace_back(res.measure.point(i).begin(), res.measure.point(i).end());
    if (x0.empty() && res.measure.weight(i) > 0.0) x0 = query.back();
  }
  KantorovichPotential psi = kantorovich_potential(res.plan, query, x0);
  ComplementarityReport comp = complementarity_report(res, psi);
  double map_res = transport_map_residual(res);

  std::vector<Point> support;
  for (std::size_t i = 0; i < res.measure.size(); ++i)
    if (res.measure.weight(i) > 0.0) support.push_back(query[i]);
  std::vector<Point> centers;
  for (std::size_t i = 0; i < support.size(); i += std::max<std::size_t>(1, support.size() / 32))
    centers.push_back(support[i]);
  double diam = res.measure.bbox_diameter();
  auto omega = omega_of_R(support, centers, {0.1 * diam, 0.2 * diam, 0.4 * diam});
  write_pairs_csv(out + "/omega.csv", "R,omega", omega);

  json d;
  d["complementarity_max"] = comp.max_weighted;
  d["c_shift"] = comp.c_shift;
  d["off_support_min"] = comp.off_support_min;
  d["off_support_ok"] = comp.off_support_ok;
  d["map_residual_max"] = map_res;
  d["flags"] = json::array();
  d["flags"].push_back({{"name", "off_support_inequality"}, {"pass", comp.off_support_ok}});
  double comp_thr = jget(sc, "complementarity_threshold", 1e-3);
  bool comp_ok = comp.max_weighted <= comp_thr;
  d["flags"].push_back({{"name", "complementarity"}, {"pass", comp_ok}});
  write_text_file(out + "/diagnostics.json", d.dump(2) + "\n");

  if (!comp.off_support_ok || !comp_ok) {
    rc.exit_code = 2;
    rc.messages.push_back("diagnostic thresholds exceeded");
  }
  return rc;
}

}  // namespace

RunOutcome run_selftest() {
  RunOutcome rc;
  auto expect = [&rc](bool ok, const std::string& what) {
    if (!ok) {
      rc.exit_code = 1;
      rc.messages.push_back("selftest failed: " + what);
    }
  };
  expect(std::abs(semicircle_density(0.0, 2.0) - 1.0 / (2.0 * 3.14159265358979323846)) < 1e-12,
         "semicircle value at origin");
  expect(semicircle_density(2.0, 2.0) == 0.0, "semicircle support edge");
  {
    std::vector<Point> sq = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    expect(std::abs(slab_width(sq, Ball({0.5, 0.5}, 2.0)) - 1.0) < 1e-6, "square slab width");
    std::vector<Point> line = {{0, 0}, {0.5, 0}, {1, 0}};
    expect(slab_width(line, Ball({0.5, 0.0}, 2.0)) < 1e-12, "collinear slab width");
  }
  {
    std::vector<double> w = {0.9, 0.4, -0.3};
    project_simplex(w);
    double s = w[0] + w[1] + w[2];
    expect(std::abs(s - 1.0) < 1e-12 && w[2] == 0.0, "simplex projection");
  }
  {
    DiscreteMeasure a({0.0, 1.0}, {0.5, 0.5}, 1);
    DiscreteMeasure b({0.0, 1.0}, {0.5, 0.5}, 1);
    TransportPlan p = solve_exact(a, b);
    expect(std::abs(p.cost) < 1e-12, "identity transport cost");
  }
  {
    DiscreteMeasure m({0.0, 1.0}, {0.5, 0.5}, 1);
    expect(std::abs(interaction_energy(m, KernelSpec::log2d())) < 1e-12,
           "unit-distance interaction energy");
  }
  return rc;
}

RunOutcome run_scenario(const json& scenario, const std::string& out_dir) {
  auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);
  RunOutcome rc;
  std::string kind;
  try {
    kind = scenario.at("kind").get<std::string>();
    if (kind == "equilibrium")
      rc = run_equilibrium(scenario, out_dir);
    else if (kind == "flow")
      rc = run_flow(scenario, out_dir);
    else if (kind == "gas")
      rc = run_gas(scenario, out_dir);
    else if (kind == "diagnostics")
      rc = run_diagnostics(scenario, out_dir);
    else if (kind == "selftest")
      rc = run_selftest();
    else
      throw ConfigParse("unknown scenario kind: " + kind);
  } catch (const json::exception& e) {
    return {1, {std::string("config error: ") + e.what()}};
  } catch (const Error& e) {
    return {1, {std::string("run error: ") + e.what()}};
  }
  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(out_dir, scenario, wall);
  return rc;
}

RunOutcome run_scenario_file(const std::string& scenario_path, const std::string& out_dir) {
  json sc;
  try {
    sc = json::parse(read_text_file(scenario_path));
  } catch (const json::exception& e) {
    return {1, {std::string("cannot parse ") + scenario_path + ": " + e.what()}};
  } catch (const Error& e) {
    return {1, {e.what()}};
  }
  return run_scenario(sc, out_dir);
}

RunOutcome compare_runs(const std::string& dir_a, const std::string& dir_b) {
  RunOutcome rc;
  if (!fs::exists(dir_a + "/manifest.json") || !fs::exists(dir_b + "/manifest.json"))
    return {1, {"manifest.json missing in one of the run directories"}};
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    std::string other = dir_b + "/" + name;
    if (!fs::exists(other)) {
      rc.exit_code = 2;
      rc.messages.push_back("missing in second run: " + name);
      continue;
    }
    std::string a = read_text_file(entry.path().string());
    std::string b = read_text_file(other);
    if (name == "manifest.json") {
      json ja = json::parse(a), jb = json::parse(b);
      ja.erase("wall_time");
      jb.erase("wall_time");
      if (ja.dump() != jb.dump()) {
        rc.exit_code = 2;
        rc.messages.push_back("manifest drift (ignoring wall time)");
      }
      continue;
    }
    if (a != b) {
      rc.exit_code = 2;
      rc.messages.push_back("byte drift in " + name);
    }
  }
  if (rc.exit_code == 0) rc.messages.push_back("runs identical (wall time excluded)");
  return rc;
}

}  // namespace eqm
