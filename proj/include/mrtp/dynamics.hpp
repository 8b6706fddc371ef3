#pragma once

#include <Eigen/Dense>

namespace mrtp {

/// Differential-drive platform constants.
struct RobotParams {
  double body_length = 0.52;    // chassis length [m]
  double wheel_radius = 0.0875; // [m]
  double wheel_sep = 0.45;      // distance between drive wheels [m]
  double mass = 25.0;           // [kg], carried for reporting only
  double v_max = 2.0;           // wheel speed limit [m/s]
  double a_limit = 1.5;         // wheel tangential acceleration limit [m/s^2]
  double body_radius = 0.35;    // bounding disc for collision checks [m]
};

/// State q = [x, y, v_r, v_l, theta, t]. Time is carried as a state so
/// space-time obstacle constraints can read it like any other component.
struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double v_r = 0.0;
  double v_l = 0.0;
  double theta = 0.0;
  double t = 0.0;

  Eigen::Matrix<double, 6, 1> vec() const;
  static RobotState from_vec(const Eigen::Matrix<double, 6, 1>& v);

  double speed() const { return 0.5 * (v_r + v_l); }
};

/// Wheel acceleration command; wheel speed rates are wheel_radius * u.
struct ControlInput {
  double u_r = 0.0;
  double u_l = 0.0;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// dq/dt of the drive model:
///   xdot = (v_r + v_l)/2 cos(theta), ydot = (v_r + v_l)/2 sin(theta),
///   v_rdot = r u_r, v_ldot = r u_l, thetadot = (v_r - v_l)/l_w, tdot = 1.
Eigen::Matrix<double, 6, 1> derivative(const RobotState& q,
                                       const ControlInput& u,
                                       const RobotParams& p);

/// Control-affine split: derivative == f(q) + g(q) * [u_r, u_l]^T.
void affine_parts(const RobotState& q, const RobotParams& p,
                  Eigen::Matrix<double, 6, 1>& f,
                  Eigen::Matrix<double, 6, 2>& g);

/// One smooth RK4 step (no clamping, no angle wrap). Exposed separately
/// because the trajectory optimizer differentiates through it.
Eigen::Matrix<double, 6, 1> rk4_step(const Eigen::Matrix<double, 6, 1>& q,
                                     const ControlInput& u, double dt,
                                     const RobotParams& p);

/// RK4 step plus analytic Jacobians d(next)/dq (6x6) and d(next)/du (6x2).
void rk4_step_jacobian(const Eigen::Matrix<double, 6, 1>& q,
                       const ControlInput& u, double dt, const RobotParams& p,
                       Eigen::Matrix<double, 6, 1>& next,
                       Eigen::Matrix<double, 6, 6>& dq,
                       Eigen::Matrix<double, 6, 2>& du);

/// Simulation step: RK4 followed by wheel-speed clamping to [-v_max, v_max]
/// and wrapping theta into (-pi, pi].
RobotState integrate(const RobotState& q, const ControlInput& u, double dt,
                     const RobotParams& p);

}  // namespace mrtp
