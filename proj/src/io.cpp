#include "eqm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace eqm {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_measure_csv(const std::string& path, const DiscreteMeasure& mu) {
  std::ostringstream out;
  for (int k = 0; k < mu.dim(); ++k) out << "x" << k + 1 << ",";
  out << "w\n";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (double c : mu.point(i)) out << format_double(c) << ",";
    out << format_double(mu.weight(i)) << "\n";
  }
  write_text_file(path, out.str());
}

DiscreteMeasure read_measure_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ConfigParse("empty measure file: " + path);
  int dim = 0;
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) ++dim;
    --dim;  // last column is the weight
  }
  if (dim < 1) throw ConfigParse("bad measure header in " + path);
  std::vector<double> coords, weights;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string col;
    std::vector<double> row;
    while (std::getline(ls, col, ',')) row.push_back(std::stod(col));
    if (static_cast<int>(row.size()) != dim + 1)
      throw ConfigParse("bad row arity in " + path);
    coords.insert(coords.end(), row.begin(), row.end() - 1);
    weights.push_back(row.back());
  }
  return DiscreteMeasure(std::move(coords), std::move(weights), dim);
}

void write_plan_csv(const std::string& path, const TransportPlan& plan) {
  std::ostringstream out;
  out << "i,j,mass,cost\n";
  for (const auto& e : plan.pairs) {
    double c = 0.0;
    auto x = plan.source.point(e.i);
    auto y = plan.target.point(e.j);
    for (std::size_t k = 0; k < x.size(); ++k) c += 0.5 * (x[k] - y[k]) * (x[k] - y[k]);
    out << e.i << "," << e.j << "," << format_double(e.mass) << "," << format_double(c) << "\n";
  }
  write_text_file(path, out.str());
}

void write_duals_csv(const std::string& path, const TransportPlan& plan) {
  std::ostringstream out;
  out << "side,index,value\n";
  for (std::size_t i = 0; i < plan.dual_source.size(); ++i)
    out << "a," << i << "," << format_double(plan.dual_source[i]) << "\n";
  for (std::size_t j = 0; j < plan.dual_target.size(); ++j)
    out << "b," << j << "," << format_double(plan.dual_target[j]) << "\n";
  write_text_file(path, out.str());
}

void write_energy_json(const std::string& path, const EnergyBreakdown& e) {
  json j;
  j["interaction"] = e.interaction;
  j["transport"] = e.transport;
  j["total"] = e.total;
  if (e.confinement) j["confinement"] = *e.confinement;
  write_text_file(path, j.dump(2) + "\n");
}

void write_pairs_csv(const std::string& path, const std::string& header,
                     const std::vector<std::pair<double, double>>& rows) {
  std::ostringstream out;
  out << header << "\n";
  for (const auto& [a, b] : rows)
    out << format_double(a) << "," << format_double(b) << "\n";
  write_text_file(path, out.str());
}

void write_grid_json(const std::string& path, const GridDensity& g) {
  json j;
  j["origin"] = g.origin();
  j["spacing"] = g.spacing();
  j["shape"] = g.shape();
  j["cells"] = g.cells();
  write_text_file(path, j.dump() + "\n");
}

GridDensity read_grid_json(const std::string& path) {
  json j = json::parse(read_text_file(path));
  return GridDensity(j.at("origin").get<Point>(), j.at("spacing").get<std::vector<double>>(),
                     j.at("shape").get<std::vector<std::size_t>>(),
                     j.at("cells").get<std::vector<double>>(), /*normalize=*/false);
}

}  // namespace eqm
