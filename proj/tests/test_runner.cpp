#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "eqm/io.hpp"
#include "eqm/runner.hpp"

using namespace eqm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("eqm_test_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

json small_equilibrium_scenario() {
  json sc;
  sc["kind"] = "equilibrium";
  sc["grid"] = {{"min", -2.5}, {"max", 2.5}, {"count", 61}};
  sc["target"] = {{"type", "dirac"}, {"point", {0.0}}};
  sc["seed"] = 3;
  return sc;
}

}  // namespace

TEST_CASE("selftest passes") {
  RunOutcome rc = run_selftest();
  CHECK(rc.exit_code == 0);
  CHECK(rc.messages.empty());
}

TEST_CASE("equilibrium scenario writes its artifacts and succeeds") {
  TempDir dir("eq");
  RunOutcome rc = run_scenario(small_equilibrium_scenario(), dir.str());
  CHECK(rc.exit_code == 0);
  for (const char* name : {"weights.csv", "plan.csv", "duals.csv", "energy.json",
                           "el_report.json", "manifest.json"})
    CHECK(fs::exists(dir.path / name));

  // the written measure reads back with the same atoms
  DiscreteMeasure mu = read_measure_csv((dir.path / "weights.csv").string());
  CHECK(mu.size() == 61);
  CHECK(mu.dim() == 1);

  json manifest = json::parse(read_text_file((dir.path / "manifest.json").string()));
  CHECK(manifest.at("kind") == "equilibrium");
  CHECK(manifest.at("seed") == 3);
  CHECK(manifest.contains("config_hash"));
  CHECK(manifest.contains("wall_time"));
}

TEST_CASE("reruns are byte-identical; tampering is detected") {
  TempDir a("rep_a"), b("rep_b");
  json sc = small_equilibrium_scenario();
  CHECK(run_scenario(sc, a.str()).exit_code == 0);
  CHECK(run_scenario(sc, b.str()).exit_code == 0);
  RunOutcome cmp = compare_runs(a.str(), b.str());
  CHECK(cmp.exit_code == 0);

  // flip one byte in an artifact: drift must be reported with exit code 2
  std::string path = (b.path / "weights.csv").string();
  std::string contents = read_text_file(path);
  contents[contents.size() / 2] = (contents[contents.size() / 2] == '1') ? '2' : '1';
  write_text_file(path, contents);
  RunOutcome drift = compare_runs(a.str(), b.str());
  CHECK(drift.exit_code == 2);
}

TEST_CASE("comparing against a directory without a manifest is an error") {
  TempDir a("cmp_a"), b("cmp_b");
  CHECK(run_scenario(small_equilibrium_scenario(), a.str()).exit_code == 0);
  RunOutcome rc = compare_runs(a.str(), b.str());
  CHECK(rc.exit_code == 1);
}

TEST_CASE("malformed configurations exit with code 1") {
  TempDir dir("bad");
  json missing;
  missing["kind"] = "equilibrium";  // no grid, no target
  CHECK(run_scenario(missing, dir.str()).exit_code == 1);

  json unknown;
  unknown["kind"] = "does-not-exist";
  CHECK(run_scenario(unknown, dir.str()).exit_code == 1);

  // unparsable file
  std::string bad_path = (dir.path / "broken.json").string();
  write_text_file(bad_path, "{ not json");
  CHECK(run_scenario_file(bad_path, dir.str()).exit_code == 1);

  // nonexistent file
  CHECK(run_scenario_file((dir.path / "nope.json").string(), dir.str()).exit_code == 1);
}

TEST_CASE("flow scenario runs and reports mass conservation") {
  TempDir dir("flow");
  json sc;
  sc["kind"] = "flow";
  sc["grid"] = {{"origin", {-2.0, -2.0}},
                {"spacing", {0.125, 0.125}},
                {"shape", {32, 32}}};
  sc["blob"] = {{"sigma", 0.4}};
  sc["steps"] = 20;
  sc["dt_factor"] = 0.5;
  RunOutcome rc = run_scenario(sc, dir.str());
  CHECK(rc.exit_code == 0);
  json rep = json::parse(read_text_file((dir.path / "dissipation.json").string()));
  CHECK(rep.at("mass_drift").get<double>() <= 1e-10);
  CHECK(rep.at("pass").get<bool>());
  CHECK(fs::exists(dir.path / "energy_history.csv"));
  CHECK(fs::exists(dir.path / "final_density.json"));

  // density round-trip through the JSON writer
  GridDensity rho = read_grid_json((dir.path / "final_density.json").string());
  CHECK(rho.shape()[0] == 32);
  CHECK(std::abs(rho.mass() - 1.0) <= 1e-9);
}

TEST_CASE("gas scenario produces samples and a statistics report") {
  TempDir dir("gas");
  json sc;
  sc["kind"] = "gas";
  sc["n"] = 24;
  sc["g"] = 2.0;
  sc["sweeps"] = 800;
  sc["burn_in"] = 200;
  sc["seed"] = 9;
  RunOutcome rc = run_scenario(sc, dir.str());
  CHECK(rc.exit_code == 0);
  json rep = json::parse(read_text_file((dir.path / "gas_report.json").string()));
  CHECK(rep.at("pass").get<bool>());
  CHECK(rep.at("ks").get<double>() <= rep.at("ks_threshold").get<double>());
  CHECK(fs::exists(dir.path / "samples.csv"));
}

TEST_CASE("diagnostics scenario writes the obstacle and boundary reports") {
  TempDir dir("diag");
  json sc = small_equilibrium_scenario();
  sc["kind"] = "diagnostics";
  RunOutcome rc = run_scenario(sc, dir.str());
  CHECK(rc.exit_code == 0);
  json d = json::parse(read_text_file((dir.path / "diagnostics.json").string()));
  CHECK(d.at("off_support_ok").get<bool>());
  CHECK(d.at("complementarity_max").get<double>() <= 1e-3);
  CHECK(fs::exists(dir.path / "omega.csv"));
}

TEST_CASE("double formatting round-trips exactly") {
  for (double v : {0.1, 1.0 / 3.0, 1e-17, 123456789.123456789, -0.0}) {
    std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}
