#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "vservo/placement.hpp"
#include "vservo/sim.hpp"

namespace vservo {

using Json = nlohmann::json;

/// Cell-wide defaults. Every field is optional in the file.
struct WorkbenchConfig {
  RobotGeometry geo;
  CameraParams cam;
  ActuatorParams act;
  ControllerGains gains;
  WorkspaceParams ws;
  std::string out_dir = ".";
};

Json read_json_file(const std::string& path);

WorkbenchConfig workbench_from_json(const Json& j);
WorkbenchConfig load_workbench(const std::string& path);

ScenarioConfig scenario_from_json(const Json& j, const WorkbenchConfig& wb = {});
ScenarioConfig load_scenario(const std::string& path, const WorkbenchConfig& wb = {});

struct SearchSpec {
  std::string name = "search";
  SearchParams params;
  WorkspaceParams ws;
  RobotGeometry geo;
  NoiseField field = two_minima_field();
};

SearchSpec search_from_json(const Json& j, const WorkbenchConfig& wb = {});
SearchSpec load_search(const std::string& path, const WorkbenchConfig& wb = {});

/// A parameter scan over a scenario, a search or the reduced visual loop.
struct SweepSpec {
  std::string name = "sweep";
  std::string kind;       // "scenario" | "search" | "reduced_visual"
  std::string parameter;  // see docs/formats.md
  std::vector<double> values;
  Json base;              // scenario or search object
  int repeats = 1;        // search: seeds seed..seed+repeats-1, averaged
  double phi = 0.0;       // reduced_visual
  double omega_n = 10.0;
  double duration = 5.0;
  double dt = 1e-3;
};

SweepSpec sweep_from_json(const Json& j, const std::string& base_dir);
SweepSpec load_sweep(const std::string& path);

struct SweepTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

SweepTable run_sweep(const SweepSpec& s, const WorkbenchConfig& wb = {});

// ---- emitters ----
Json metrics_to_json(const ScenarioResult& r, const ScenarioConfig& cfg);
void write_trace_csv(std::ostream& os, const ScenarioTrace& tr);
void write_search_csv(std::ostream& os, const SearchResult& r);
Json search_summary_json(const SearchResult& r, const NodeGrid& g, const SearchSpec& s);
void write_table_csv(std::ostream& os, const SweepTable& t);

/// Channels whose steady-state error exceeds `tol`.
std::vector<int> unmatched_channels(const ResponseMetrics& m, double tol);

}  // namespace vservo
