#include "mrtp/coordinator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_set>

namespace mrtp {

namespace {

double seconds_since(std::chrono::steady_clock::time_point from) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - from)
      .count();
}

/// Cells whose centers lie within `radius` of `center`.
void disc_cells(const OccupancyGrid& grid, WorldPoint center, double radius,
                std::vector<CellIndex>& out) {
  const double res = grid.resolution();
  const int reach = static_cast<int>(std::ceil(radius / res));
  const auto anchor = grid.world_to_cell(center);
  int row0 = 0;
  int col0 = 0;
  if (anchor) {
    row0 = anchor->row;
    col0 = anchor->col;
  } else {
    row0 = static_cast<int>(std::floor(center.y / res));
    col0 = static_cast<int>(std::floor(center.x / res));
  }
  const double r2 = radius * radius;
  for (int row = row0 - reach; row <= row0 + reach; ++row) {
    for (int col = col0 - reach; col <= col0 + reach; ++col) {
      if (!grid.in_bounds(CellIndex{row, col})) continue;
      const WorldPoint c = grid.cell_to_world(CellIndex{row, col});
      const double dx = c.x - center.x;
      const double dy = c.y - center.y;
      if (dx * dx + dy * dy <= r2) out.push_back(CellIndex{row, col});
    }
  }
}

/// Grid cells touched by the curve over the arc interval [s0, s1].
std::unordered_set<int> window_cells(const OccupancyGrid& grid,
                                     const FittedCurve& curve, double s0,
                                     double s1) {
  std::unordered_set<int> cells;
  const double len = curve.total_length();
  const double lo = std::clamp(s0, 0.0, len);
  const double hi = std::clamp(s1, 0.0, len);
  const double step = 0.5 * grid.resolution();
  const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / step)));
  for (int i = 0; i <= n; ++i) {
    const double s = lo + (hi - lo) * i / n;
    const WorldPoint p = curve.point_at_arclength(s);
    if (const auto cell = grid.world_to_cell(p)) {
      cells.insert(cell->row * grid.width() + cell->col);
    }
  }
  return cells;
}

/// Restores the penalty layer on every exit path of handle_replan.
/// Undoes exactly the surcharge it applied, so penalties layered by the
/// caller (for example clearance shaping) survive a replan query.
struct PenaltyGuard {
  OccupancyGrid& grid;
  std::vector<CellIndex> cells;
  std::vector<double> saved;
  PenaltyGuard(OccupancyGrid& g, const std::vector<CellIndex>& c, double v)
      : grid(g), cells(c) {
    saved.reserve(cells.size());
    for (const CellIndex& cell : cells) saved.push_back(grid.penalty(cell));
    grid.apply_penalty(cells, v);
  }
  ~PenaltyGuard() {
    // Restore the exact prior values: a standing penalty field (clearance
    // shaping) must survive the temporary replanning surcharge.
    for (std::size_t i = 0; i < cells.size(); ++i) {
      grid.apply_penalty({cells[i]}, saved[i]);
    }
  }
};

/// Decimation plus fit plus refinement of a found cell path.
PlanOutcome build_path(const OccupancyGrid& grid, const AgsResult& ags,
                       WorldPoint start, WorldPoint goal, int robot_id,
                       PlanTimings* timings) {
  const auto fit_start = std::chrono::steady_clock::now();
  const SearchPath& path = ags.selected();

  std::vector<WorldPoint> raw;
  raw.push_back(start);
  for (const CellIndex& cell : turning_points(path)) {
    raw.push_back(grid.cell_to_world(cell));
  }
  raw.push_back(goal);

  // Pull the polyline taut: greedily skip corners whenever the direct leg
  // keeps a comfortable margin to walls. This strips the micro-corner
  // staircases a cost-shaped grid search produces, so the fitted curve
  // stays smooth and centered.
  const double margin = 0.5;
  auto leg_clear = [&](const WorldPoint& a, const WorldPoint& b) {
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const int steps = std::max(1, static_cast<int>(std::ceil(
                                   len / (0.5 * grid.resolution()))));
    for (int k = 0; k <= steps; ++k) {
      const double u = static_cast<double>(k) / steps;
      const WorldPoint p{a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u};
      if (occupied_clearance(grid, p, margin) < margin) return false;
    }
    return true;
  };
  std::vector<WorldPoint> waypoints;
  waypoints.push_back(raw.front());
  for (std::size_t i = 0; i + 1 < raw.size();) {
    std::size_t j = raw.size() - 1;
    while (j > i + 1 && !leg_clear(raw[i], raw[j])) --j;
    waypoints.push_back(raw[j]);
    i = j;
  }

  // Subdivide long legs before fitting. Interior collinear points pin the
  // spline to the polyline, so a distant corner's tangent cannot bow a
  // straight run off its corridor.
  std::vector<Eigen::Vector2d> pts;
  pts.emplace_back(waypoints.front().x, waypoints.front().y);
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    const Eigen::Vector2d a(waypoints[i - 1].x, waypoints[i - 1].y);
    const Eigen::Vector2d b(waypoints[i].x, waypoints[i].y);
    const double len = (b - a).norm();
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / 1.0)));
    for (int k = 1; k <= pieces; ++k) {
      pts.emplace_back(a + (b - a) * (static_cast<double>(k) / pieces));
    }
  }

  PlanOutcome out;
  const FittedCurve fitted = fit_curve(pts);
  RefineResult refined = ccd_refine(fitted, grid);
  if (timings != nullptr) timings->fit_seconds += seconds_since(fit_start);

  GlobalPath gp;
  gp.robot_id = robot_id;
  gp.waypoints = std::move(waypoints);
  gp.curve = std::move(refined.curve);
  gp.length = gp.curve.total_length();
  gp.weight = gp.length;
  gp.search_order = ags.selected_order;
  gp.refine_status = refined.status;
  out.path = std::move(gp);
  return out;
}

}  // namespace

const char* to_string(ReplanReason reason) {
  switch (reason) {
    case ReplanReason::CommonSet: return "common-set";
    case ReplanReason::Stagnation: return "stagnation";
  }
  return "unknown";
}

DistanceTable distance_table(const std::vector<WorldPoint>& positions) {
  const int n = static_cast<int>(positions.size());
  Eigen::MatrixXd pts(n, 2);
  for (int i = 0; i < n; ++i) {
    pts(i, 0) = positions[static_cast<std::size_t>(i)].x;
    pts(i, 1) = positions[static_cast<std::size_t>(i)].y;
  }
  const Eigen::MatrixXd gram = pts * pts.transpose();
  const Eigen::VectorXd sq = gram.diagonal();
  DistanceTable table;
  table.n = n;
  table.entries = sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
                  2.0 * gram;
  table.entries = table.entries.cwiseMax(0.0);
  table.entries.diagonal().setZero();
  return table;
}

std::vector<int> neighbors(const DistanceTable& table, int id, double radius) {
  std::vector<int> out;
  const double r2 = radius * radius;
  for (int j = 0; j < table.n; ++j) {
    if (j != id && table.entries(id, j) <= r2) out.push_back(j);
  }
  return out;
}

std::vector<std::vector<int>> negotiation_groups(const DistanceTable& table,
                                                 double radius) {
  const double r2 = radius * radius;
  std::vector<std::vector<int>> groups;
  std::vector<bool> seen(static_cast<std::size_t>(table.n), false);
  for (int seed = 0; seed < table.n; ++seed) {
    if (seen[static_cast<std::size_t>(seed)]) continue;
    std::vector<int> group;
    std::vector<int> stack{seed};
    seen[static_cast<std::size_t>(seed)] = true;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      group.push_back(i);
      for (int j = 0; j < table.n; ++j) {
        if (seen[static_cast<std::size_t>(j)] || table.entries(i, j) > r2 ||
            j == i) {
          continue;
        }
        seen[static_cast<std::size_t>(j)] = true;
        stack.push_back(j);
      }
    }
    std::sort(group.begin(), group.end());
    groups.push_back(std::move(group));
  }
  return groups;
}

std::vector<PriorityEntry> priorities(const FleetSnapshot& snapshot) {
  std::vector<PriorityEntry> out;
  out.reserve(snapshot.robots.size());
  for (const RobotSnapshot& r : snapshot.robots) {
    out.push_back(PriorityEntry{r.id, r.remaining});
  }
  std::sort(out.begin(), out.end(),
            [](const PriorityEntry& a, const PriorityEntry& b) {
              if (a.weight != b.weight) return a.weight > b.weight;
              return a.id < b.id;
            });
  return out;
}

PlanOutcome plan_one(const OccupancyGrid& grid, WorldPoint start,
                     WorldPoint goal, int robot_id, int max_order,
                     SearchWorkspace& ws, PlanTimings* timings) {
  PlanOutcome out;
  const auto start_cell = grid.world_to_cell(start);
  const auto goal_cell = grid.world_to_cell(goal);
  if (!start_cell || !goal_cell) {
    out.error = "start or goal outside the map";
    return out;
  }
  if (grid.occupied(*start_cell) || grid.occupied(*goal_cell)) {
    out.error = "start or goal cell occupied";
    return out;
  }
  const double dx = goal.x - start.x;
  const double dy = goal.y - start.y;
  if (dx * dx + dy * dy < 1e-18) {
    out.error = "start equals goal";
    return out;
  }

  const auto search_start = std::chrono::steady_clock::now();
  const auto ags = ags_plan(grid, *start_cell, *goal_cell, max_order, ws);
  if (timings != nullptr) timings->search_seconds += seconds_since(search_start);
  if (!ags) {
    out.error = "no path found";
    return out;
  }
  return build_path(grid, *ags, start, goal, robot_id, timings);
}

std::vector<PlanOutcome> plan_all(const OccupancyGrid& grid,
                                  const std::vector<WorldPoint>& starts,
                                  const std::vector<WorldPoint>& goals,
                                  const CoordinatorConfig& cfg,
                                  SearchWorkspace& ws, PlanTimings* timings) {
  std::vector<PlanOutcome> out;
  out.reserve(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    out.push_back(plan_one(grid, starts[i], goals[i], static_cast<int>(i),
                           cfg.max_order, ws, timings));
  }
  return out;
}

std::optional<GlobalPath> handle_replan(const ReplanRequest& req,
                                        const FleetSnapshot& snapshot,
                                        const std::vector<const GlobalPath*>& paths,
                                        OccupancyGrid& grid,
                                        const CoordinatorConfig& cfg,
                                        SearchWorkspace& ws) {
  int ri = -1;
  for (std::size_t i = 0; i < snapshot.robots.size(); ++i) {
    if (snapshot.robots[i].id == req.id) {
      ri = static_cast<int>(i);
      break;
    }
  }
  if (ri < 0 || paths[static_cast<std::size_t>(ri)] == nullptr) {
    return std::nullopt;
  }
  const GlobalPath& own = *paths[static_cast<std::size_t>(ri)];
  const double own_weight = snapshot.robots[static_cast<std::size_t>(ri)].remaining;
  const WorldPoint goal = own.waypoints.back();

  std::vector<CellIndex> penalized;
  const double r2 = cfg.comm_radius * cfg.comm_radius;
  for (std::size_t j = 0; j < snapshot.robots.size(); ++j) {
    if (static_cast<int>(j) == ri) continue;
    const RobotSnapshot& other = snapshot.robots[j];
    const bool higher = other.remaining > own_weight ||
                        (other.remaining == own_weight && other.id < req.id);
    if (!higher) continue;
    const double dx = other.state.x - req.position.x;
    const double dy = other.state.y - req.position.y;
    if (dx * dx + dy * dy > r2) continue;

    std::vector<WorldPoint> predicted;
    for (const RobotState& s : other.trajectory.states) {
      predicted.push_back(WorldPoint{s.x, s.y});
    }
    if (const GlobalPath* path = paths[j]) {
      const double s_now = std::max(0.0, path->length - other.remaining);
      const double s_end =
          s_now + cfg.nominal_speed * cfg.predict_horizon;
      const double step = grid.resolution();
      const double hi = std::min(s_end, path->length);
      for (double s = s_now; s <= hi; s += step) {
        predicted.push_back(path->curve.point_at_arclength(s));
      }
    }
    for (const WorldPoint& p : predicted) {
      disc_cells(grid, p, cfg.comm_radius, penalized);
    }
  }

  PenaltyGuard guard{grid, penalized, cfg.penalty};

  const auto start_cell = grid.world_to_cell(req.position);
  const auto goal_cell = grid.world_to_cell(goal);
  if (!start_cell || !goal_cell) return std::nullopt;
  const auto ags = replan_search(grid, *start_cell, *goal_cell, cfg.max_order, ws);
  if (!ags) return std::nullopt;

  PlanOutcome out = build_path(grid, *ags, req.position, goal, req.id, nullptr);
  return out.path;
}

MeritDecision path_meritocracy(double s_remain, double s_pred, double t_opti,
                               double s_new, double v_bar) {
  const double t_new = s_new / v_bar;
  const double t_old = t_opti + (s_remain - s_pred) / v_bar;
  return t_new < t_old ? MeritDecision::TakeNew : MeritDecision::KeepOld;
}

bool common_set_check(const OccupancyGrid& grid, const GlobalPath& own,
                      double own_s, const LocalTrajectory& own_traj,
                      const std::vector<HigherNeighbor>& higher,
                      const CoordinatorConfig& cfg) {
  if (higher.empty() || own_traj.states.empty()) return false;

  const RobotState& tail = own_traj.states.back();
  const double s_end = own.curve.project(WorldPoint{tail.x, tail.y}, own_s,
                                         1.0, cfg.window_length + 1.0);
  if (s_end - own_s >= cfg.eps_progress) return false;

  const auto own_cells =
      window_cells(grid, own.curve, own_s, own_s + cfg.window_length);
  for (const HigherNeighbor& nb : higher) {
    if (nb.path == nullptr) continue;
    const auto other = window_cells(grid, nb.path->curve, nb.s_now,
                                    nb.s_now + cfg.window_length);
    for (const int key : other) {
      if (own_cells.count(key) > 0) return true;
    }
  }
  return false;
}

}  // namespace mrtp
