#include "mrtp/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mrtp {

namespace {

using ordered_json = nlohmann::ordered_json;

double get_or(const ordered_json& j, const char* key, double fallback) {
  if (j.contains(key)) return j.at(key).get<double>();
  return fallback;
}

int get_or(const ordered_json& j, const char* key, int fallback) {
  if (j.contains(key)) return j.at(key).get<int>();
  return fallback;
}

bool get_or(const ordered_json& j, const char* key, bool fallback) {
  if (j.contains(key)) return j.at(key).get<bool>();
  return fallback;
}

std::string dir_of(const std::string& path) {
  const std::size_t slash = path.find_last_of('/');
  if (slash == std::string::npos) return ".";
  return path.substr(0, slash);
}

}  // namespace

const char* to_string(SimMode mode) {
  return mode == SimMode::Deterministic ? "deterministic" : "concurrent";
}

ScenarioConfig scenario_from_json(const ordered_json& j,
                                  const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("scenario root must be an object");
  ScenarioConfig cfg;
  cfg.name = j.contains("name") ? j.at("name").get<std::string>() : "scenario";
  if (!j.contains("map")) throw ConfigError("scenario missing \"map\"");
  const std::string map = j.at("map").get<std::string>();
  cfg.map_path = (!map.empty() && map.front() == '/')
                     ? map
                     : base_dir + "/" + map;

  if (j.contains("mode")) {
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "deterministic" || mode == "det") {
      cfg.mode = SimMode::Deterministic;
    } else if (mode == "concurrent" || mode == "conc") {
      cfg.mode = SimMode::Concurrent;
    } else {
      throw ConfigError("unknown mode: " + mode);
    }
  }
  cfg.seed = static_cast<unsigned>(get_or(j, "seed", 0));
  cfg.duration_limit = get_or(j, "duration_limit", cfg.duration_limit);
  cfg.v_cruise = get_or(j, "v_cruise", cfg.v_cruise);
  cfg.dis_f = get_or(j, "dis_f", cfg.dis_f);
  cfg.arrival_tol = get_or(j, "arrival_tol", cfg.arrival_tol);
  cfg.replanning = get_or(j, "replanning", cfg.replanning);
  cfg.replan_cooldown = get_or(j, "replan_cooldown", cfg.replan_cooldown);
  cfg.stagnation_horizon =
      get_or(j, "stagnation_horizon", cfg.stagnation_horizon);
  cfg.min_replan_remaining =
      get_or(j, "min_replan_remaining", cfg.min_replan_remaining);

  if (j.contains("robot_params")) {
    const auto& p = j.at("robot_params");
    cfg.params.body_length = get_or(p, "body_length", cfg.params.body_length);
    cfg.params.wheel_radius =
        get_or(p, "wheel_radius", cfg.params.wheel_radius);
    cfg.params.wheel_sep = get_or(p, "wheel_sep", cfg.params.wheel_sep);
    cfg.params.mass = get_or(p, "mass", cfg.params.mass);
    cfg.params.v_max = get_or(p, "v_max", cfg.params.v_max);
    cfg.params.a_limit = get_or(p, "a_limit", cfg.params.a_limit);
    cfg.params.body_radius = get_or(p, "body_radius", cfg.params.body_radius);
  }
  if (j.contains("barrier")) {
    const auto& b = j.at("barrier");
    cfg.barrier.d0 = get_or(b, "d0", cfg.barrier.d0);
    cfg.barrier.gamma = get_or(b, "gamma", cfg.barrier.gamma);
    cfg.barrier.lambda = get_or(b, "lambda", cfg.barrier.lambda);
    cfg.barrier.R = get_or(b, "R", cfg.barrier.R);
    cfg.barrier.R_l = get_or(b, "R_l", cfg.barrier.R_l);
    cfg.barrier.c0 = get_or(b, "c0", cfg.barrier.c0);
    cfg.barrier.c1 = get_or(b, "c1", cfg.barrier.c1);
    cfg.barrier.c2 = get_or(b, "c2", cfg.barrier.c2);
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    cfg.solver.w_goal = get_or(s, "w_goal", cfg.solver.w_goal);
    cfg.solver.w_ref = get_or(s, "w_ref", cfg.solver.w_ref);
    cfg.solver.w_u = get_or(s, "w_u", cfg.solver.w_u);
    cfg.solver.w_prog = get_or(s, "w_prog", cfg.solver.w_prog);
    cfg.solver.kkt_tol = get_or(s, "kkt_tol", cfg.solver.kkt_tol);
    cfg.solver.time_limit = get_or(s, "time_limit", cfg.solver.time_limit);
    cfg.solver.max_outer = get_or(s, "max_outer", cfg.solver.max_outer);
    cfg.solver.max_inner = get_or(s, "max_inner", cfg.solver.max_inner);
    cfg.solver.enforce_time_limit =
        get_or(s, "enforce_time_limit", cfg.solver.enforce_time_limit);
  }
  if (j.contains("coordinator")) {
    const auto& c = j.at("coordinator");
    cfg.coordinator.max_order = get_or(c, "max_order", cfg.coordinator.max_order);
    cfg.coordinator.comm_radius =
        get_or(c, "comm_radius", cfg.coordinator.comm_radius);
    cfg.coordinator.predict_horizon =
        get_or(c, "predict_horizon", cfg.coordinator.predict_horizon);
    cfg.coordinator.nominal_speed =
        get_or(c, "nominal_speed", cfg.coordinator.nominal_speed);
    cfg.coordinator.penalty = get_or(c, "penalty", cfg.coordinator.penalty);
    cfg.coordinator.window_length =
        get_or(c, "window_length", cfg.coordinator.window_length);
    cfg.coordinator.eps_progress =
        get_or(c, "eps_progress", cfg.coordinator.eps_progress);
  }

  if (!j.contains("robots") || !j.at("robots").is_array()) {
    throw ConfigError("scenario missing \"robots\" array");
  }
  for (const auto& r : j.at("robots")) {
    RobotSpec spec;
    spec.id = get_or(r, "id", static_cast<int>(cfg.robots.size()));
    if (!r.contains("start") || !r.contains("goal")) {
      throw ConfigError("robot entry missing start or goal");
    }
    const auto& start = r.at("start");
    spec.x = start.at(0).get<double>();
    spec.y = start.at(1).get<double>();
    spec.theta = start.size() > 2 ? start.at(2).get<double>() : 0.0;
    const auto& goal = r.at("goal");
    spec.goal_x = goal.at(0).get<double>();
    spec.goal_y = goal.at(1).get<double>();
    spec.hold_until = get_or(r, "hold_until", 0.0);
    cfg.robots.push_back(spec);
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  ordered_json j = ordered_json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("malformed scenario JSON: " + path);
  return scenario_from_json(j, dir_of(path));
}

void validate_scenario(const ScenarioConfig& cfg, const OccupancyGrid& grid) {
  std::set<int> ids;
  for (const RobotSpec& r : cfg.robots) {
    if (!ids.insert(r.id).second) {
      throw ConfigError("duplicate robot id " + std::to_string(r.id));
    }
    const auto start = grid.world_to_cell(WorldPoint{r.x, r.y});
    const auto goal = grid.world_to_cell(WorldPoint{r.goal_x, r.goal_y});
    if (!start || grid.occupied(*start)) {
      throw ConfigError("robot " + std::to_string(r.id) +
                        " start not in free space");
    }
    if (!goal || grid.occupied(*goal)) {
      throw ConfigError("robot " + std::to_string(r.id) +
                        " goal not in free space");
    }
  }
  for (std::size_t i = 0; i < cfg.robots.size(); ++i) {
    for (std::size_t k = i + 1; k < cfg.robots.size(); ++k) {
      const double dx = cfg.robots[i].x - cfg.robots[k].x;
      const double dy = cfg.robots[i].y - cfg.robots[k].y;
      if (std::sqrt(dx * dx + dy * dy) < cfg.barrier.d0) {
        throw ConfigError("robots " + std::to_string(cfg.robots[i].id) +
                          " and " + std::to_string(cfg.robots[k].id) +
                          " start closer than d0");
      }
    }
  }
  if (cfg.v_cruise <= 0.0 || cfg.v_cruise > cfg.params.v_max) {
    throw ConfigError("v_cruise must be in (0, v_max]");
  }
  if (!cfg.solver.valid()) {
    throw ConfigError("solver weights invalid (w_ref must exceed w_goal)");
  }
}

nlohmann::ordered_json resolved_json(const ScenarioConfig& cfg) {
  ordered_json j;
  j["name"] = cfg.name;
  j["map"] = cfg.map_path;
  j["mode"] = to_string(cfg.mode);
  j["seed"] = cfg.seed;
  j["duration_limit"] = cfg.duration_limit;
  j["control_rate"] = cfg.control_rate;
  j["plan_rate"] = cfg.plan_rate;
  j["v_cruise"] = cfg.v_cruise;
  j["dis_f"] = cfg.dis_f;
  j["dt_plan"] = cfg.dt_plan;
  j["n_points"] = cfg.n_points;
  j["arrival_tol"] = cfg.arrival_tol;
  j["replanning"] = cfg.replanning;
  j["replan_cooldown"] = cfg.replan_cooldown;
  j["stagnation_horizon"] = cfg.stagnation_horizon;
  j["min_replan_remaining"] = cfg.min_replan_remaining;
  j["robot_params"] = {{"body_length", cfg.params.body_length},
                       {"wheel_radius", cfg.params.wheel_radius},
                       {"wheel_sep", cfg.params.wheel_sep},
                       {"mass", cfg.params.mass},
                       {"v_max", cfg.params.v_max},
                       {"a_limit", cfg.params.a_limit},
                       {"body_radius", cfg.params.body_radius}};
  j["barrier"] = {{"d0", cfg.barrier.d0},     {"gamma", cfg.barrier.gamma},
                  {"lambda", cfg.barrier.lambda}, {"R", cfg.barrier.R},
                  {"R_l", cfg.barrier.R_l},   {"c0", cfg.barrier.c0},
                  {"c1", cfg.barrier.c1},     {"c2", cfg.barrier.c2}};
  j["solver"] = {{"w_goal", cfg.solver.w_goal},
                 {"w_ref", cfg.solver.w_ref},
                 {"w_u", cfg.solver.w_u},
                 {"w_prog", cfg.solver.w_prog},
                 {"kkt_tol", cfg.solver.kkt_tol},
                 {"time_limit", cfg.solver.time_limit},
                 {"enforce_time_limit", cfg.solver.enforce_time_limit},
                 {"max_outer", cfg.solver.max_outer},
                 {"max_inner", cfg.solver.max_inner}};
  j["coordinator"] = {{"max_order", cfg.coordinator.max_order},
                      {"comm_radius", cfg.coordinator.comm_radius},
                      {"predict_horizon", cfg.coordinator.predict_horizon},
                      {"nominal_speed", cfg.coordinator.nominal_speed},
                      {"penalty", cfg.coordinator.penalty},
                      {"window_length", cfg.coordinator.window_length},
                      {"eps_progress", cfg.coordinator.eps_progress}};
  ordered_json robots = ordered_json::array();
  for (const RobotSpec& r : cfg.robots) {
    ordered_json entry;
    entry["id"] = r.id;
    entry["start"] = ordered_json::array({r.x, r.y, r.theta});
    entry["goal"] = ordered_json::array({r.goal_x, r.goal_y});
    entry["hold_until"] = r.hold_until;
    robots.push_back(std::move(entry));
  }
  j["robots"] = std::move(robots);
  return j;
}

}  // namespace mrtp
