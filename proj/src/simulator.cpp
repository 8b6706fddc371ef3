#include "mrtp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mrtp/local_planner.hpp"

namespace mrtp {

namespace {

using ordered_json = nlohmann::ordered_json;

// Route cost shaping near walls: a cell at rectangle distance d from the
// nearest obstacle costs an extra kClearanceGain * (1 - d/kClearanceRange)^2
// meters. The falloff grades the rows of a tight channel, so the search
// threads its center instead of treating every passable row as equal.
constexpr double kClearanceRange = 0.8;
constexpr double kClearanceGain = 8.0;

struct SimRobot {
  RobotSpec spec;
  RobotState state;
  GlobalPath path;
  bool has_path = false;
  int path_id = 0;
  double s_now = 0.0;
  double adopt_time = 0.0;
  bool arrived = false;
  double arrive_time = 0.0;
  double travel = 0.0;
  LocalTrajectory traj;
  bool has_traj = false;
  long traj_start_tick = 0;
  SolverSession session;
  double last_replan = -1e9;
  std::deque<std::pair<double, double>> progress;  // (t, s) per plan tick

  bool holding(double t) const { return t < spec.hold_until && !arrived; }
};

LocalTrajectory parked_trajectory(const RobotState& pose, double t0, int n,
                                  double dt) {
  LocalTrajectory traj;
  traj.status = SolveStatus::Feasible;
  traj.states.resize(static_cast<std::size_t>(n));
  traj.controls.assign(static_cast<std::size_t>(n - 1), ControlInput{});
  for (int k = 0; k < n; ++k) {
    RobotState s = pose;
    s.v_r = 0.0;
    s.v_l = 0.0;
    s.t = t0 + k * dt;
    traj.states[static_cast<std::size_t>(k)] = s;
  }
  return traj;
}

/// Emergency-stop rollout: wheel decelerations that reach zero speed
/// without reversing. Replaces the trajectory after a failed solve, so the
/// published track, the executed controls, and the next warm start all
/// describe the robot actually stopping instead of a stale prediction.
LocalTrajectory braking_trajectory(const RobotState& state,
                                   const RobotParams& params, int n,
                                   double dt) {
  LocalTrajectory traj;
  traj.status = SolveStatus::Fallback;
  traj.states.resize(static_cast<std::size_t>(n));
  traj.controls.resize(static_cast<std::size_t>(n - 1));
  const double u_lim = params.a_limit / params.wheel_radius;
  RobotState s = state;
  traj.states[0] = s;
  for (int k = 0; k + 1 < n; ++k) {
    ControlInput u;
    u.u_r = std::clamp(-s.v_r / (params.wheel_radius * dt), -u_lim, u_lim);
    u.u_l = std::clamp(-s.v_l / (params.wheel_radius * dt), -u_lim, u_lim);
    traj.controls[static_cast<std::size_t>(k)] = u;
    s = integrate(s, u, dt, params);
    traj.states[static_cast<std::size_t>(k + 1)] = s;
  }
  return traj;
}

double goal_distance(const SimRobot& r) {
  const double dx = r.state.x - r.spec.goal_x;
  const double dy = r.state.y - r.spec.goal_y;
  return std::sqrt(dx * dx + dy * dy);
}

ordered_json tick_to_json(const TickRecord& rec) {
  ordered_json j;
  j["type"] = "tick";
  j["t"] = rec.t;
  ordered_json robots = ordered_json::array();
  for (const RobotTick& r : rec.robots) {
    ordered_json entry;
    entry["id"] = r.id;
    entry["x"] = r.x;
    entry["y"] = r.y;
    entry["theta"] = r.theta;
    entry["v_r"] = r.v_r;
    entry["v_l"] = r.v_l;
    entry["u_r"] = r.u_r;
    entry["u_l"] = r.u_l;
    entry["s"] = r.s;
    entry["plen"] = r.plen;
    entry["done"] = r.done;
    robots.push_back(std::move(entry));
  }
  j["robots"] = std::move(robots);
  return j;
}

ordered_json plan_to_json(const PlanRecord& rec, bool include_timings) {
  ordered_json j;
  j["type"] = "plan";
  j["t"] = rec.t;
  ordered_json solves = ordered_json::array();
  for (const SolveRecord& s : rec.solves) {
    ordered_json entry;
    entry["id"] = s.id;
    entry["status"] = s.status;
    entry["outer"] = s.outer;
    entry["inner"] = s.inner;
    entry["objective"] = s.objective;
    entry["feas"] = s.feas;
    if (include_timings) entry["solve_time"] = s.solve_time;
    solves.push_back(std::move(entry));
  }
  j["solves"] = std::move(solves);
  ordered_json replans = ordered_json::array();
  for (const ReplanEvent& e : rec.replans) {
    ordered_json entry;
    entry["id"] = e.id;
    entry["reason"] = e.reason;
    entry["outcome"] = e.outcome;
    entry["s_new"] = e.s_new;
    replans.push_back(std::move(entry));
  }
  j["replans"] = std::move(replans);
  j["path_changes"] = rec.path_changes;
  return j;
}

}  // namespace

void SimTrace::write(std::ostream& out) const {
  out << header.dump() << '\n';
  std::size_t ti = 0;
  std::size_t pi = 0;
  while (ti < ticks.size() || pi < plans.size()) {
    const bool plan_first =
        pi < plans.size() &&
        (ti >= ticks.size() || plans[pi].t <= ticks[ti].t);
    if (plan_first) {
      out << plan_to_json(plans[pi], include_timings).dump() << '\n';
      ++pi;
    } else {
      out << tick_to_json(ticks[ti]).dump() << '\n';
      ++ti;
    }
  }
}

std::string SimTrace::to_string() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

SimTrace SimTrace::read(std::istream& in) {
  SimTrace trace;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ordered_json j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    const std::string type = j.value("type", "");
    if (type == "header") {
      trace.header = std::move(j);
      have_header = true;
    } else if (type == "tick") {
      TickRecord rec;
      rec.t = j.at("t").get<double>();
      for (const auto& r : j.at("robots")) {
        RobotTick rt;
        rt.id = r.at("id").get<int>();
        rt.x = r.at("x").get<double>();
        rt.y = r.at("y").get<double>();
        rt.theta = r.at("theta").get<double>();
        rt.v_r = r.at("v_r").get<double>();
        rt.v_l = r.at("v_l").get<double>();
        rt.u_r = r.at("u_r").get<double>();
        rt.u_l = r.at("u_l").get<double>();
        rt.s = r.at("s").get<double>();
        rt.plen = r.at("plen").get<double>();
        rt.done = r.at("done").get<bool>();
        rec.robots.push_back(rt);
      }
      trace.ticks.push_back(std::move(rec));
    } else if (type == "plan") {
      PlanRecord rec;
      rec.t = j.at("t").get<double>();
      for (const auto& s : j.at("solves")) {
        SolveRecord sr;
        sr.id = s.at("id").get<int>();
        sr.status = s.at("status").get<std::string>();
        sr.outer = s.at("outer").get<int>();
        sr.inner = s.at("inner").get<int>();
        sr.objective = s.at("objective").get<double>();
        sr.feas = s.value("feas", 0.0);
        if (s.contains("solve_time")) {
          sr.solve_time = s.at("solve_time").get<double>();
          trace.include_timings = true;
        }
        rec.solves.push_back(std::move(sr));
      }
      for (const auto& e : j.at("replans")) {
        ReplanEvent ev;
        ev.id = e.at("id").get<int>();
        ev.reason = e.at("reason").get<std::string>();
        ev.outcome = e.at("outcome").get<std::string>();
        ev.s_new = e.at("s_new").get<double>();
        rec.replans.push_back(std::move(ev));
      }
      rec.path_changes = j.at("path_changes").get<std::vector<int>>();
      trace.plans.push_back(std::move(rec));
    }
  }
  if (!have_header) trace.header = ordered_json::object();
  return trace;
}

SimResult run_scenario(const ScenarioConfig& cfg, const OccupancyGrid& grid) {
  validate_scenario(cfg, grid);
  OccupancyGrid sim_grid = grid;
  // Wall-adjacent cells carry a standing graded surcharge so routes prefer
  // the middle of free channels. Tight passages stay passable, they just
  // cost more than any centered alternative.
  for (const auto& [cell, dist] : cells_near_occupied(sim_grid, kClearanceRange)) {
    const double f = 1.0 - dist / kClearanceRange;
    sim_grid.apply_penalty({cell}, kClearanceGain * f * f);
  }

  SimResult out;
  out.trace.header = ordered_json::object();
  out.trace.header["type"] = "header";
  out.trace.header["config"] = resolved_json(cfg);
  out.trace.include_timings = cfg.mode == SimMode::Concurrent;

  const std::size_t n = cfg.robots.size();
  out.metrics.completion.resize(n);
  out.metrics.mean_speed.assign(n, 0.0);
  out.metrics.min_pairwise = std::numeric_limits<double>::max();
  out.metrics.min_clearance = std::numeric_limits<double>::max();
  if (n == 0) {
    out.metrics.min_pairwise = 0.0;
    out.metrics.min_clearance = 0.0;
    return out;
  }

  const double dt_ctrl = 1.0 / cfg.control_rate;
  const int plan_stride = static_cast<int>(
      std::lround(cfg.control_rate / cfg.plan_rate));
  const int ctrl_per_interval = static_cast<int>(
      std::lround(cfg.dt_plan * cfg.control_rate));
  const double t_horizon = (cfg.n_points - 1) * cfg.dt_plan;
  const double clearance_cap = cfg.params.body_radius +
                               3.0 * sim_grid.resolution();
  // Wall-clock relabeling would make deterministic trace bytes depend on
  // machine speed; it only applies where timings are recorded anyway.
  const bool budget_relabel =
      cfg.mode == SimMode::Concurrent && cfg.solver.enforce_time_limit;

  // Fleet routes.
  SearchWorkspace ws;
  std::vector<WorldPoint> starts;
  std::vector<WorldPoint> goals;
  for (const RobotSpec& r : cfg.robots) {
    starts.push_back(WorldPoint{r.x, r.y});
    goals.push_back(WorldPoint{r.goal_x, r.goal_y});
  }
  auto outcomes = plan_all(sim_grid, starts, goals, cfg.coordinator, ws,
                           &out.metrics.plan_timings);

  std::vector<SimRobot> robots(n);
  for (std::size_t i = 0; i < n; ++i) {
    SimRobot& r = robots[i];
    r.spec = cfg.robots[i];
    r.state.x = r.spec.x;
    r.state.y = r.spec.y;
    r.state.theta = wrap_angle(r.spec.theta);
    if (!outcomes[i].path) {
      throw PlanningError("robot " + std::to_string(r.spec.id) + ": " +
                          outcomes[i].error);
    }
    r.path = std::move(*outcomes[i].path);
    r.path.robot_id = r.spec.id;
    r.has_path = true;
  }

  const long max_ticks = static_cast<long>(
      std::ceil(cfg.duration_limit * cfg.control_rate));

  auto remaining_of = [&](const SimRobot& r) {
    if (r.arrived) return 0.0;
    return std::max(0.0, r.path.length - r.s_now);
  };

  auto solve_one = [&](SimRobot& r, const FleetSnapshot& snap,
                       const std::vector<int>& group, double t,
                       long tick) -> SolveRecord {
    SolveRecord rec;
    rec.id = r.spec.id;
    const std::size_t self = static_cast<std::size_t>(&r - robots.data());
    const double own_weight = snap.robots[self].remaining;

    LocalProblem prob;
    prob.initial = r.state;
    prob.target = extract_local_goal(r.path.curve, r.s_now, cfg.dis_f,
                                     cfg.n_points);
    std::vector<NeighborPlan> nbs;
    for (const int gi : group) {
      if (static_cast<std::size_t>(gi) == self) continue;
      const SimRobot& other = robots[static_cast<std::size_t>(gi)];
      if (!other.has_traj) continue;
      nbs.push_back(NeighborPlan{other.spec.id,
                                 snap.robots[static_cast<std::size_t>(gi)].remaining,
                                 &other.traj});
    }
    prob.tracks = ingest_priority_obstacles(nbs, r.spec.id, own_weight);
    // A stationary body blocks space no matter its priority: arrived,
    // holding, or stalled robots become static obstacles for everyone, so a
    // higher-priority robot routes around a stopped one instead of treating
    // it as yielding traffic.
    for (const SimRobot& other : robots) {
      if (&other == &r) continue;
      const bool stopped = std::max(std::abs(other.state.v_r),
                                    std::abs(other.state.v_l)) < 0.05;
      if (!other.arrived && !stopped) continue;
      const bool already =
          std::any_of(prob.tracks.begin(), prob.tracks.end(),
                      [&](const ObstacleTrack& tr) {
                        return tr.id == other.spec.id;
                      });
      if (already) continue;
      ObstacleTrack track;
      track.id = other.spec.id;
      track.source = TrackSource::Static;
      track.samples.push_back(
          SpacetimeSample{other.state.x, other.state.y, t});
      prob.tracks.push_back(std::move(track));
    }
    prob.params = cfg.params;
    prob.barrier = cfg.barrier;
    prob.solver = cfg.solver;
    prob.v_cruise = cfg.v_cruise;
    prob.dt = cfg.dt_plan;
    prob.n_points = cfg.n_points;

    LocalTrajectory warm;
    const bool have_warm = r.has_traj;
    if (have_warm) {
      warm = fallback_tail(r.traj, (tick - r.traj_start_tick) * dt_ctrl,
                           cfg.dt_plan);
    }
    LocalTrajectory traj =
        solve(prob, have_warm ? &warm : nullptr, &r.session);
    rec.outer = traj.outer_iters;
    rec.inner = traj.inner_iters;
    rec.objective = traj.objective;
    rec.feas = traj.feas_inf;
    rec.solve_time = traj.solve_time;
    if (traj.status == SolveStatus::Infeasible) {
      if (!have_warm) {
        throw PlanningError("robot " + std::to_string(r.spec.id) +
                            ": no feasible trajectory on first solve");
      }
      const double solve_time = traj.solve_time;
      traj = braking_trajectory(r.state, cfg.params, cfg.n_points,
                                cfg.dt_plan);
      traj.solve_time = solve_time;
    } else if (budget_relabel && traj.solve_time > cfg.solver.time_limit) {
      traj.status = SolveStatus::Fallback;
    }
    r.traj = std::move(traj);
    r.has_traj = true;
    r.traj_start_tick = tick;

    rec.status = to_string(r.traj.status);
    return rec;
  };

  for (long tick = 0;; ++tick) {
    const double t = tick * dt_ctrl;

    for (SimRobot& r : robots) {
      if (!r.arrived && goal_distance(r) <= cfg.arrival_tol) {
        r.arrived = true;
        r.arrive_time = t;
        r.state.v_r = 0.0;
        r.state.v_l = 0.0;
        r.s_now = r.path.length;
      }
    }
    const bool all_arrived =
        std::all_of(robots.begin(), robots.end(),
                    [](const SimRobot& r) { return r.arrived; });
    if (all_arrived || tick >= max_ticks) {
      TickRecord rec;
      rec.t = t;
      for (const SimRobot& r : robots) {
        rec.robots.push_back(RobotTick{r.spec.id, r.state.x, r.state.y,
                                       r.state.theta, r.state.v_r, r.state.v_l,
                                       0.0, 0.0, r.s_now, r.path.length,
                                       r.arrived});
      }
      out.trace.ticks.push_back(std::move(rec));
      out.metrics.deadline_exceeded = !all_arrived;
      break;
    }

    if (tick % plan_stride == 0) {
      PlanRecord prec;
      prec.t = t;

      for (SimRobot& r : robots) {
        if (r.holding(t) || r.arrived) {
          r.traj = parked_trajectory(r.state, t, cfg.n_points, cfg.dt_plan);
          r.has_traj = true;
          r.traj_start_tick = tick;
        }
      }

      FleetSnapshot snap;
      snap.time = t;
      std::vector<WorldPoint> positions;
      for (SimRobot& r : robots) {
        RobotSnapshot rs;
        rs.id = r.spec.id;
        rs.state = r.state;
        rs.remaining = remaining_of(r);
        rs.path_id = r.path_id;
        rs.trajectory = r.traj;
        snap.robots.push_back(std::move(rs));
        positions.push_back(WorldPoint{r.state.x, r.state.y});
      }
      const DistanceTable table = distance_table(positions);
      const double r2 = cfg.coordinator.comm_radius * cfg.coordinator.comm_radius;

      if (cfg.replanning) {
        for (std::size_t i = 0; i < n; ++i) {
          SimRobot& r = robots[i];
          if (r.arrived || r.holding(t) || !r.has_path || !r.has_traj) continue;
          const double remaining = snap.robots[i].remaining;
          if (remaining < cfg.min_replan_remaining) continue;
          if (t - r.last_replan < cfg.replan_cooldown) continue;

          std::vector<HigherNeighbor> higher;
          for (std::size_t j = 0; j < n; ++j) {
            if (j == i || table.entries(static_cast<int>(i),
                                        static_cast<int>(j)) > r2) {
              continue;
            }
            const double wj = snap.robots[j].remaining;
            const bool is_higher =
                wj > remaining ||
                (wj == remaining && robots[j].spec.id < r.spec.id);
            if (is_higher && robots[j].has_path) {
              higher.push_back(HigherNeighbor{&robots[j].path,
                                              robots[j].s_now});
            }
          }

          std::optional<ReplanReason> reason;
          if (common_set_check(sim_grid, r.path, r.s_now, r.traj, higher,
                               cfg.coordinator)) {
            reason = ReplanReason::CommonSet;
          } else if (!r.progress.empty() &&
                     r.progress.front().first <= t - cfg.stagnation_horizon &&
                     r.s_now - r.progress.front().second <
                         cfg.coordinator.eps_progress) {
            reason = ReplanReason::Stagnation;
          }
          if (!reason) continue;

          ReplanEvent ev;
          ev.id = r.spec.id;
          ev.reason = to_string(*reason);
          const ReplanRequest req{r.spec.id,
                                  WorldPoint{r.state.x, r.state.y}, *reason};
          std::vector<const GlobalPath*> paths;
          for (const SimRobot& other : robots) {
            paths.push_back(other.has_path ? &other.path : nullptr);
          }
          const auto candidate = handle_replan(req, snap, paths, sim_grid,
                                               cfg.coordinator, ws);
          if (!candidate) {
            ev.outcome = "failed";
          } else {
            const RobotState& tail = r.traj.states.back();
            const double s_tail = r.path.curve.project(
                WorldPoint{tail.x, tail.y}, r.s_now, 1.0,
                cfg.dis_f + 2.0);
            const double s_pred = std::max(0.0, s_tail - r.s_now);
            const double elapsed = t - r.adopt_time;
            const double v_bar = (elapsed > 1e-9 && r.s_now > 1e-9)
                                     ? r.s_now / elapsed
                                     : 0.5 * cfg.params.v_max;
            ev.s_new = candidate->length;
            if (path_meritocracy(remaining, s_pred, t_horizon,
                                 candidate->length, v_bar) ==
                MeritDecision::TakeNew) {
              r.path = *candidate;
              r.has_path = true;
              r.path_id += 1;
              r.s_now = 0.0;
              r.adopt_time = t;
              r.progress.clear();
              snap.robots[i].remaining = r.path.length;
              snap.robots[i].path_id = r.path_id;
              prec.path_changes.push_back(r.spec.id);
              out.metrics.replan_adopted += 1;
              ev.outcome = "adopted";
            } else {
              ev.outcome = "kept";
            }
          }
          r.last_replan = t;
          out.metrics.replan_count += 1;
          prec.replans.push_back(std::move(ev));
        }
      }

      const auto groups = negotiation_groups(table, cfg.coordinator.comm_radius);
      auto solve_group = [&](const std::vector<int>& group) {
        std::vector<int> order = group;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
          const double wa = snap.robots[static_cast<std::size_t>(a)].remaining;
          const double wb = snap.robots[static_cast<std::size_t>(b)].remaining;
          if (wa != wb) return wa > wb;
          return robots[static_cast<std::size_t>(a)].spec.id <
                 robots[static_cast<std::size_t>(b)].spec.id;
        });
        std::vector<SolveRecord> recs;
        for (const int gi : order) {
          SimRobot& r = robots[static_cast<std::size_t>(gi)];
          if (r.holding(t)) {
            SolveRecord sr;
            sr.id = r.spec.id;
            sr.status = "hold";
            recs.push_back(std::move(sr));
            continue;
          }
          if (r.arrived) {
            SolveRecord sr;
            sr.id = r.spec.id;
            sr.status = "arrived";
            recs.push_back(std::move(sr));
            continue;
          }
          recs.push_back(solve_one(r, snap, group, t, tick));
        }
        return recs;
      };

      if (cfg.mode == SimMode::Concurrent && groups.size() > 1) {
        std::vector<std::future<std::vector<SolveRecord>>> futures;
        futures.reserve(groups.size());
        for (const auto& group : groups) {
          futures.push_back(std::async(std::launch::async, solve_group,
                                       std::cref(group)));
        }
        for (auto& f : futures) {
          for (SolveRecord& sr : f.get()) prec.solves.push_back(std::move(sr));
        }
      } else {
        for (const auto& group : groups) {
          for (SolveRecord& sr : solve_group(group)) {
            prec.solves.push_back(std::move(sr));
          }
        }
      }

      for (const SolveRecord& sr : prec.solves) {
        if (sr.status == "hold" || sr.status == "arrived") continue;
        out.metrics.solve_times.push_back(sr.solve_time);
        if (sr.status == "fallback") out.metrics.fallback_count += 1;
      }

      for (SimRobot& r : robots) {
        if (r.arrived || r.holding(t)) continue;
        r.progress.push_back({t, r.s_now});
        while (r.progress.size() > 1 &&
               r.progress[1].first <= t - cfg.stagnation_horizon) {
          r.progress.pop_front();
        }
      }
      out.trace.plans.push_back(std::move(prec));
    }

    TickRecord rec;
    rec.t = t;
    std::vector<ControlInput> inputs(n);
    for (std::size_t i = 0; i < n; ++i) {
      SimRobot& r = robots[i];
      ControlInput u;
      if (!r.arrived && !r.holding(t) && r.has_traj &&
          !r.traj.controls.empty()) {
        long idx = (tick - r.traj_start_tick) / ctrl_per_interval;
        idx = std::clamp<long>(idx, 0,
                               static_cast<long>(r.traj.controls.size()) - 1);
        u = r.traj.controls[static_cast<std::size_t>(idx)];
      }
      inputs[i] = u;
      rec.robots.push_back(RobotTick{r.spec.id, r.state.x, r.state.y,
                                     r.state.theta, r.state.v_r, r.state.v_l,
                                     u.u_r, u.u_l, r.s_now, r.path.length,
                                     r.arrived});
    }
    out.trace.ticks.push_back(std::move(rec));

    for (std::size_t i = 0; i < n; ++i) {
      SimRobot& r = robots[i];
      if (r.arrived) {
        r.state.t = t + dt_ctrl;
        continue;
      }
      const double px = r.state.x;
      const double py = r.state.y;
      r.state = integrate(r.state, inputs[i], dt_ctrl, cfg.params);
      const double dx = r.state.x - px;
      const double dy = r.state.y - py;
      r.travel += std::sqrt(dx * dx + dy * dy);
      if (r.has_path) {
        const double s = r.path.curve.project(
            WorldPoint{r.state.x, r.state.y}, r.s_now, 0.5, 1.5);
        r.s_now = std::max(r.s_now, s);
      }
    }
  }

  // Post-run metrics.
  double makespan = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const SimRobot& r = robots[i];
    const double active = r.arrived ? r.arrive_time
                                    : out.trace.ticks.back().t;
    out.metrics.mean_speed[i] = active > 1e-9 ? r.travel / active : 0.0;
    if (r.arrived) makespan = std::max(makespan, r.arrive_time);
  }
  out.metrics.makespan = makespan;
  out.metrics.completion = completion_series(out.trace);

  for (const TickRecord& rec : out.trace.ticks) {
    for (std::size_t i = 0; i < rec.robots.size(); ++i) {
      const RobotTick& a = rec.robots[i];
      const double clearance =
          occupied_clearance(sim_grid, WorldPoint{a.x, a.y}, clearance_cap) -
          cfg.params.body_radius;
      out.metrics.min_clearance = std::min(out.metrics.min_clearance, clearance);
      for (std::size_t j = i + 1; j < rec.robots.size(); ++j) {
        const RobotTick& b = rec.robots[j];
        const double d = std::hypot(a.x - b.x, a.y - b.y);
        out.metrics.min_pairwise = std::min(out.metrics.min_pairwise, d);
      }
    }
  }
  if (n < 2) out.metrics.min_pairwise = 0.0;

  std::vector<double> sorted = out.metrics.solve_times;
  std::sort(sorted.begin(), sorted.end());
  out.metrics.solve_count = static_cast<int>(sorted.size());
  if (!sorted.empty()) {
    double sum = 0.0;
    for (const double v : sorted) sum += v;
    out.metrics.solve_mean = sum / sorted.size();
    const std::size_t p95 = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(sorted.size())));
    out.metrics.solve_p95 = sorted[std::min(sorted.size() - 1,
                                            std::max<std::size_t>(p95, 1) - 1)];
    out.metrics.solve_max = sorted.back();
  }
  return out;
}

std::vector<Violation> collision_monitor(const SimTrace& trace, double d0,
                                         const OccupancyGrid& grid) {
  double body_radius = 0.35;
  if (trace.header.contains("config") &&
      trace.header["config"].contains("robot_params")) {
    body_radius = trace.header["config"]["robot_params"].value("body_radius",
                                                               body_radius);
  }
  const double cap = body_radius + 3.0 * grid.resolution();
  std::vector<Violation> out;
  for (const TickRecord& rec : trace.ticks) {
    for (std::size_t i = 0; i < rec.robots.size(); ++i) {
      const RobotTick& a = rec.robots[i];
      const double clearance = occupied_clearance(grid, WorldPoint{a.x, a.y}, cap);
      if (clearance < body_radius) {
        out.push_back(Violation{rec.t, a.id, -1, clearance});
      }
      for (std::size_t j = i + 1; j < rec.robots.size(); ++j) {
        const RobotTick& b = rec.robots[j];
        const double d = std::hypot(a.x - b.x, a.y - b.y);
        if (d < d0) out.push_back(Violation{rec.t, a.id, b.id, d});
      }
    }
  }
  return out;
}

std::vector<std::vector<CompletionPoint>> completion_series(
    const SimTrace& trace) {
  std::vector<std::vector<CompletionPoint>> out;
  if (trace.ticks.empty()) return out;
  double control_rate = 200.0;
  if (trace.header.contains("config")) {
    control_rate = trace.header["config"].value("control_rate", control_rate);
  }
  const std::size_t stride = static_cast<std::size_t>(
      std::max(1L, std::lround(control_rate / 10.0)));
  out.resize(trace.ticks.front().robots.size());
  for (std::size_t ti = 0; ti < trace.ticks.size(); ti += stride) {
    const TickRecord& rec = trace.ticks[ti];
    for (std::size_t i = 0; i < rec.robots.size() && i < out.size(); ++i) {
      const RobotTick& r = rec.robots[i];
      double ratio = 0.0;
      if (r.done) {
        ratio = 1.0;
      } else if (r.plen > 1e-9) {
        ratio = std::clamp(r.s / r.plen, 0.0, 1.0);
      }
      out[i].push_back(CompletionPoint{rec.t, ratio});
    }
  }
  return out;
}

nlohmann::ordered_json Metrics::to_json() const {
  ordered_json j;
  j["makespan"] = makespan;
  j["deadline_exceeded"] = deadline_exceeded;
  j["min_pairwise_distance"] = min_pairwise;
  j["min_static_clearance"] = min_clearance;
  j["solve_time"] = {{"mean", solve_mean},
                     {"p95", solve_p95},
                     {"max", solve_max},
                     {"count", solve_count}};
  j["fallback_count"] = fallback_count;
  j["replan_count"] = replan_count;
  j["replan_adopted"] = replan_adopted;
  j["plan_timings"] = {{"search_seconds", plan_timings.search_seconds},
                       {"fit_seconds", plan_timings.fit_seconds}};
  j["mean_speed"] = mean_speed;
  ordered_json completion_json = ordered_json::array();
  for (const auto& series : completion) {
    ordered_json arr = ordered_json::array();
    for (const CompletionPoint& p : series) {
      arr.push_back(ordered_json::array({p.t, p.ratio}));
    }
    completion_json.push_back(std::move(arr));
  }
  j["completion"] = std::move(completion_json);
  j["solve_times"] = solve_times;
  return j;
}

}  // namespace mrtp
