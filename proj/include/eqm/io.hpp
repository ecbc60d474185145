#pragma once

#include <string>
#include <utility>
#include <vector>

#include "eqm/energy.hpp"
#include "eqm/measure.hpp"
#include "eqm/transport.hpp"

namespace eqm {

// All writers format doubles with "%.17g" so that identical in-memory results
// produce byte-identical files.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// columns x1..xn,w
void write_measure_csv(const std::string& path, const DiscreteMeasure& mu);
DiscreteMeasure read_measure_csv(const std::string& path);

// columns i,j,mass,cost
void write_plan_csv(const std::string& path, const TransportPlan& plan);

// columns side (a|b), index, value
void write_duals_csv(const std::string& path, const TransportPlan& plan);

void write_energy_json(const std::string& path, const EnergyBreakdown& e);

// columns first,second (used for energy histories and omega tables)
void write_pairs_csv(const std::string& path, const std::string& header,
                     const std::vector<std::pair<double, double>>& rows);

void write_grid_json(const std::string& path, const GridDensity& g);
GridDensity read_grid_json(const std::string& path);

}  // namespace eqm
