#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrtp/coordinator.hpp"
#include "mrtp/dynamics.hpp"
#include "mrtp/grid_map.hpp"
#include "mrtp/local_planner.hpp"
#include "mrtp/spacetime.hpp"

namespace mrtp {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RobotSpec {
  int id = -1;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double goal_x = 0.0;
  double goal_y = 0.0;
  double hold_until = 0.0;  // stays parked (still avoided) until this time
};

enum class SimMode { Deterministic, Concurrent };

const char* to_string(SimMode mode);

struct ScenarioConfig {
  std::string name;
  std::string map_path;
  SimMode mode = SimMode::Deterministic;
  unsigned seed = 0;
  double duration_limit = 60.0;
  double control_rate = 200.0;
  double plan_rate = 20.0;
  double v_cruise = 1.0;
  double dis_f = 3.0;
  double dt_plan = 0.15;
  int n_points = 15;
  double arrival_tol = 0.1;
  bool replanning = true;
  double replan_cooldown = 2.0;
  double stagnation_horizon = 4.2;    // dwell before a stagnation replan [s]
  double min_replan_remaining = 0.5;  // no replans this close to the goal [m]
  RobotParams params;
  BarrierConfig barrier;
  SolverConfig solver;
  CoordinatorConfig coordinator;
  std::vector<RobotSpec> robots;
};

/// Parses a scenario file; map_path is resolved against the file's
/// directory. Throws ConfigError on malformed input.
ScenarioConfig load_scenario(const std::string& path);

ScenarioConfig scenario_from_json(const nlohmann::ordered_json& j,
                                  const std::string& base_dir);

/// Structural checks against the loaded map: unique ids, free starts and
/// goals, pairwise start separation >= d0. Throws ConfigError.
void validate_scenario(const ScenarioConfig& cfg, const OccupancyGrid& grid);

/// Every field, defaults included, for the trace header.
nlohmann::ordered_json resolved_json(const ScenarioConfig& cfg);

}  // namespace mrtp
