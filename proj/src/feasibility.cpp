#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mrtp/local_planner.hpp"

namespace mrtp {

FeasibilityReport check_feasibility(const LocalProblem& problem,
                                    const LocalTrajectory& traj, double tol) {
  FeasibilityReport rep;
  const int n = problem.n_points;
  if (static_cast<int>(traj.states.size()) != n ||
      static_cast<int>(traj.controls.size()) != n - 1) {
    rep.structure_ok = false;
    return rep;
  }

  const RobotState& head = traj.states[0];
  const Eigen::Matrix<double, 6, 1> head_err =
      head.vec() - problem.initial.vec();
  if (head_err.cwiseAbs().maxCoeff() > tol) rep.structure_ok = false;

  for (int k = 0; k + 1 < n; ++k) {
    const Eigen::Matrix<double, 6, 1> next =
        rk4_step(traj.states[static_cast<std::size_t>(k)].vec(),
                 traj.controls[static_cast<std::size_t>(k)], problem.dt,
                 problem.params);
    Eigen::Matrix<double, 6, 1> diff =
        traj.states[static_cast<std::size_t>(k + 1)].vec() - next;
    diff[4] = wrap_angle(diff[4]);
    rep.max_defect = std::max(rep.max_defect, diff.cwiseAbs().maxCoeff());
  }

  const double u_lim = problem.params.a_limit / problem.params.wheel_radius;
  for (int k = 1; k < n; ++k) {
    const RobotState& s = traj.states[static_cast<std::size_t>(k)];
    rep.max_bound_violation = std::max(
        {rep.max_bound_violation, std::abs(s.v_r) - problem.v_cruise,
         std::abs(s.v_l) - problem.v_cruise});
  }
  for (const ControlInput& u : traj.controls) {
    rep.max_bound_violation =
        std::max({rep.max_bound_violation, std::abs(u.u_r) - u_lim,
                  std::abs(u.u_l) - u_lim});
  }
  rep.max_bound_violation = std::max(rep.max_bound_violation, 0.0);

  double min_residual = std::numeric_limits<double>::infinity();
  bool any_hard = false;
  for (const ObstacleTrack& track : problem.tracks) {
    if (classify_track(track, problem) != ObstacleClass::Hard) continue;
    any_hard = true;
    std::vector<double> b(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const RobotState& s = traj.states[static_cast<std::size_t>(k)];
      b[static_cast<std::size_t>(k)] =
          barrier(SpacetimeSample{s.x, s.y, s.t}, track, problem.barrier);
    }
    for (int k = 0; k + 1 < n; ++k) {
      const double res = discrete_cbf_residual(
          b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(k + 1)],
          problem.barrier.gamma, problem.dt);
      min_residual = std::min(min_residual, res);
    }
  }
  rep.min_cbf_residual = any_hard ? min_residual : 0.0;

  rep.ok = rep.structure_ok && rep.max_defect <= tol &&
           rep.max_bound_violation <= tol && rep.min_cbf_residual >= -tol;
  return rep;
}

}  // namespace mrtp
