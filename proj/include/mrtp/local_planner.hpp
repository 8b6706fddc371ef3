#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mrtp/curve.hpp"
#include "mrtp/dynamics.hpp"
#include "mrtp/nlp.hpp"
#include "mrtp/spacetime.hpp"

namespace mrtp {

/// Objective weights and solver budgets for the local problem.
struct SolverConfig {
  double w_goal = 10.0;  // terminal pull toward the local goal
  double w_ref = 20.0;   // reference-line deviation (dominant weight)
  double w_u = 0.1;      // control effort
  double w_prog = 5.0;   // per-point progress reward along the reference
  double kkt_tol = 1e-6;
  double time_limit = 0.2;        // wall-clock budget [s]
  bool enforce_time_limit = true; // deterministic runs rely on iteration caps
  int max_outer = 12;
  int max_inner = 150;

  bool valid() const { return w_ref > w_goal && kkt_tol > 0.0; }
};

/// Local goal plus the reference samples feeding the tracking objective.
struct LocalGoal {
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
  std::vector<Eigen::Vector2d> reference;
  bool at_path_end = false;  // goal clamped to the curve end
};

/// Carrot extraction: goal at arc length min(s_now + dis_f, length) and
/// n_points reference samples equally spaced in arc length over
/// [s_now, goal].
LocalGoal extract_local_goal(const FittedCurve& curve, double s_now,
                             double dis_f, int n_points);

/// One receding-horizon instance for a single robot.
struct LocalProblem {
  RobotState initial;  // pinned first matched point
  LocalGoal target;
  std::vector<ObstacleTrack> tracks;
  RobotParams params;
  BarrierConfig barrier;
  SolverConfig solver;
  double v_cruise = 2.0;  // scenario speed limit, <= params.v_max
  double dt = 0.15;       // matched-point spacing [s]
  int n_points = 15;
};

enum class SolveStatus { Optimal, Feasible, Infeasible, Fallback };

const char* to_string(SolveStatus s);

struct LocalTrajectory {
  std::vector<RobotState> states;     // n_points entries
  std::vector<ControlInput> controls; // n_points - 1 entries
  SolveStatus status = SolveStatus::Fallback;
  double objective = 0.0;
  double feas_inf = 0.0;
  int outer_iters = 0;
  int inner_iters = 0;
  double solve_time = 0.0;
};

/// Carried multipliers and penalty weight so consecutive solves of the same
/// robot warm start the duals as well as the primal trajectory.
struct SolverSession {
  Eigen::VectorXd lam;
  Eigen::VectorXd mu;
  double rho = 0.0;
};

/// Obstacle handling class for one track against this problem's reference:
/// closest approach below R_l makes it a hard constraint, inside [R_l, R]
/// it only stiffens the reference weight, beyond R it is invisible.
ObstacleClass classify_track(const ObstacleTrack& track,
                             const LocalProblem& problem);

/// Direct transcription dimensions: states 1..N-1 and controls 0..N-2.
int decision_dim(const LocalProblem& problem);

/// Raw transcription of a local problem, exposed so the constraint values,
/// bounds, and merit gradients can be audited independently of solve().
std::unique_ptr<AlProblem> make_transcription(const LocalProblem& problem);

/// Solves the local problem. The warm start, when given, seeds states and
/// controls directly (callers shift it by the elapsed time first).
/// Statuses: Optimal (KKT satisfied), Feasible (budget exhausted on a
/// feasible iterate), Infeasible (no feasible iterate found; callers should
/// fall back to the previous trajectory tail).
LocalTrajectory solve(const LocalProblem& problem,
                      const LocalTrajectory* warm_start = nullptr,
                      SolverSession* session = nullptr);

/// Shifts a previous trajectory by `elapsed` seconds: the consumed prefix
/// is dropped (linear interpolation at the cut), the final state repeated
/// to restore length, controls padded with zero. Status becomes Fallback.
LocalTrajectory fallback_tail(const LocalTrajectory& previous, double elapsed,
                              double dt);

/// Zero-order-hold expansion of the piecewise-constant controls at the
/// given rate: round(dt * rate) samples per interval.
std::vector<ControlInput> control_signal(const LocalTrajectory& traj,
                                         double dt, double rate);

struct NeighborPlan {
  int id = -1;
  double weight = 0.0;
  const LocalTrajectory* trajectory = nullptr;
};

/// Builds obstacle tracks from the already-planned trajectories of
/// higher-priority neighbors (greater weight; ties favor the lower id).
std::vector<ObstacleTrack> ingest_priority_obstacles(
    const std::vector<NeighborPlan>& neighbors, int own_id, double own_weight);

/// Independent feasibility audit of a solver result (not used by the
/// solver itself): dynamics defects, bound slack, and hard-track CBF
/// residual chains, all measured against `tol`.
struct FeasibilityReport {
  double max_defect = 0.0;
  double max_bound_violation = 0.0;
  double min_cbf_residual = 0.0;
  bool structure_ok = true;
  bool ok = false;
};

FeasibilityReport check_feasibility(const LocalProblem& problem,
                                    const LocalTrajectory& traj, double tol);

}  // namespace mrtp
