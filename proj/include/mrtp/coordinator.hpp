#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrtp/ags.hpp"
#include "mrtp/curve.hpp"
#include "mrtp/grid_map.hpp"
#include "mrtp/local_planner.hpp"

namespace mrtp {

/// A fitted global route plus its priority weight (remaining arc length).
struct GlobalPath {
  int robot_id = -1;
  std::vector<WorldPoint> waypoints;
  FittedCurve curve;
  double length = 0.0;
  double weight = 0.0;
  int search_order = 1;
  RefineStatus refine_status = RefineStatus::Clean;
};

/// Per-robot view the coordinator works from at a planning tick.
struct RobotSnapshot {
  int id = -1;
  RobotState state;
  double remaining = 0.0;  // arc length left along the robot's own curve
  int path_id = -1;
  LocalTrajectory trajectory;
};

struct FleetSnapshot {
  double time = 0.0;
  std::vector<RobotSnapshot> robots;
};

/// Pairwise squared distances with constant-time lookup.
struct DistanceTable {
  int n = 0;
  Eigen::MatrixXd entries;

  double squared(int i, int j) const { return entries(i, j); }
};

DistanceTable distance_table(const std::vector<WorldPoint>& positions);

/// Indices j != id whose squared distance to id is within radius^2.
std::vector<int> neighbors(const DistanceTable& table, int id, double radius);

/// Connected components of the neighbor graph (edges at distance <= radius),
/// indices ascending within each group, groups ordered by smallest member.
std::vector<std::vector<int>> negotiation_groups(const DistanceTable& table,
                                                 double radius);

struct PriorityEntry {
  int id = -1;
  double weight = 0.0;
};

/// Descending weight, ties broken by ascending id.
std::vector<PriorityEntry> priorities(const FleetSnapshot& snapshot);

enum class ReplanReason { CommonSet, Stagnation };

const char* to_string(ReplanReason reason);

struct ReplanRequest {
  int id = -1;
  WorldPoint position;
  ReplanReason reason = ReplanReason::CommonSet;
};

struct CoordinatorConfig {
  int max_order = 4;
  double comm_radius = 1.5;      // negotiation / awareness radius R [m]
  double predict_horizon = 3.0;  // global-path look-ahead when penalizing [s]
  double nominal_speed = 1.0;    // assumed speed for that look-ahead [m/s]
  double penalty = 10000.0;      // replan surcharge per penalized cell
  double window_length = 3.0;    // common-set arc window [m]
  double eps_progress = 0.2;     // stagnation threshold over the horizon [m]
};

struct PlanOutcome {
  std::optional<GlobalPath> path;
  std::string error;
};

struct PlanTimings {
  double search_seconds = 0.0;
  double fit_seconds = 0.0;
};

/// Independent route planning for every robot: iterated search, waypoint
/// decimation to turning points, curve fit, collision-driven refinement.
/// A robot with no route gets an error string; the others still plan.
std::vector<PlanOutcome> plan_all(const OccupancyGrid& grid,
                                  const std::vector<WorldPoint>& starts,
                                  const std::vector<WorldPoint>& goals,
                                  const CoordinatorConfig& cfg,
                                  SearchWorkspace& ws,
                                  PlanTimings* timings = nullptr);

/// Single-robot variant used by both plan_all and handle_replan.
PlanOutcome plan_one(const OccupancyGrid& grid, WorldPoint start,
                     WorldPoint goal, int robot_id, int max_order,
                     SearchWorkspace& ws, PlanTimings* timings = nullptr);

/// Replan for the requesting robot: cells within comm_radius of every
/// higher-priority neighbor's predicted positions (local trajectory points
/// plus global-path samples over predict_horizon) are surcharged, the
/// search is re-run from the robot's current position, and the penalty
/// layer is restored before returning on every path.
std::optional<GlobalPath> handle_replan(const ReplanRequest& req,
                                        const FleetSnapshot& snapshot,
                                        const std::vector<const GlobalPath*>& paths,
                                        OccupancyGrid& grid,
                                        const CoordinatorConfig& cfg,
                                        SearchWorkspace& ws);

enum class MeritDecision { KeepOld, TakeNew };

/// Travel-time comparison between the replanned route and the remainder of
/// the current one: T_new = s_new / v_bar against
/// T_old = t_opti + (s_remain - s_pred) / v_bar. Ties keep the old path.
MeritDecision path_meritocracy(double s_remain, double s_pred, double t_opti,
                               double s_new, double v_bar);

/// View of one higher-priority neighbor for the common-set test.
struct HigherNeighbor {
  const GlobalPath* path = nullptr;
  double s_now = 0.0;  // its arc position along its own curve
};

/// Replan trigger: true iff the robot's look-ahead window shares a cell
/// with some higher-priority neighbor's window and its own local
/// trajectory is stagnant (projected arc progress under eps_progress).
bool common_set_check(const OccupancyGrid& grid, const GlobalPath& own,
                      double own_s, const LocalTrajectory& own_traj,
                      const std::vector<HigherNeighbor>& higher,
                      const CoordinatorConfig& cfg);

}  // namespace mrtp
