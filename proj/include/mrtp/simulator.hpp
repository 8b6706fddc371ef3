#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrtp/coordinator.hpp"
#include "mrtp/grid_map.hpp"
#include "mrtp/scenario.hpp"

namespace mrtp {

/// One robot's sample within a control-tick trace record.
struct RobotTick {
  int id = -1;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v_r = 0.0;
  double v_l = 0.0;
  double u_r = 0.0;
  double u_l = 0.0;
  double s = 0.0;     // arc position along the robot's current path
  double plen = 0.0;  // that path's total length
  bool done = false;
};

struct TickRecord {
  double t = 0.0;
  std::vector<RobotTick> robots;
};

struct SolveRecord {
  int id = -1;
  std::string status;  // optimal | feasible | fallback | hold | arrived
  int outer = 0;
  int inner = 0;
  double objective = 0.0;
  double feas = 0.0;        // worst constraint violation at the solution
  double solve_time = 0.0;  // omitted from deterministic trace lines
};

struct ReplanEvent {
  int id = -1;
  std::string reason;
  std::string outcome;  // adopted | kept | failed
  double s_new = 0.0;
};

struct PlanRecord {
  double t = 0.0;
  std::vector<SolveRecord> solves;
  std::vector<ReplanEvent> replans;
  std::vector<int> path_changes;
};

/// Line-delimited run record: one header line with the resolved config,
/// then tick and plan records in simulation order.
struct SimTrace {
  nlohmann::ordered_json header;
  std::vector<TickRecord> ticks;
  std::vector<PlanRecord> plans;

  /// When false, solve_time fields stay out of the emitted lines so that
  /// repeated runs are byte-identical.
  bool include_timings = false;

  void write(std::ostream& out) const;
  std::string to_string() const;
  static SimTrace read(std::istream& in);
};

struct Violation {
  double t = 0.0;
  int a = -1;
  int b = -1;  // -1 marks a static-clearance violation
  double distance = 0.0;
};

struct CompletionPoint {
  double t = 0.0;
  double ratio = 0.0;
};

struct Metrics {
  double makespan = 0.0;
  bool deadline_exceeded = false;
  std::vector<std::vector<CompletionPoint>> completion;
  std::vector<double> mean_speed;
  double min_pairwise = 0.0;
  double min_clearance = 0.0;
  double solve_mean = 0.0;
  double solve_p95 = 0.0;
  double solve_max = 0.0;
  int solve_count = 0;
  int fallback_count = 0;
  int replan_count = 0;
  int replan_adopted = 0;
  PlanTimings plan_timings;
  std::vector<double> solve_times;

  nlohmann::ordered_json to_json() const;
};

struct SimResult {
  SimTrace trace;
  Metrics metrics;
};

/// Runs the scenario on the given map at a 1/control_rate tick; every
/// control_rate/plan_rate ticks the planning phase runs (snapshot, distance
/// table, priorities, replan service, per-group priority-ordered solves).
/// Terminates when every robot is within arrival_tol of its goal or the
/// duration limit hits (recorded, not thrown).
SimResult run_scenario(const ScenarioConfig& cfg, const OccupancyGrid& grid);

/// Re-checks a finished trace: pairwise center distances >= d0 each tick
/// and every robot's body disc clear of occupied cells.
std::vector<Violation> collision_monitor(const SimTrace& trace, double d0,
                                         const OccupancyGrid& grid);

/// Per-robot completion-ratio series sampled at 10 Hz from the trace.
std::vector<std::vector<CompletionPoint>> completion_series(
    const SimTrace& trace);

}  // namespace mrtp
