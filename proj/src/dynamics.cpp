#include "mrtp/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace mrtp {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat66 = Eigen::Matrix<double, 6, 6>;
using Mat62 = Eigen::Matrix<double, 6, 2>;

Vec6 RobotState::vec() const {
  Vec6 v;
  v << x, y, v_r, v_l, theta, t;
  return v;
}

RobotState RobotState::from_vec(const Vec6& v) {
  return RobotState{v[0], v[1], v[2], v[3], v[4], v[5]};
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * M_PI);
  if (w <= -M_PI) {
    w = M_PI;
  }
  return w;
}

Vec6 derivative(const RobotState& q, const ControlInput& u,
                const RobotParams& p) {
  Vec6 d;
  const double v = 0.5 * (q.v_r + q.v_l);
  d[0] = v * std::cos(q.theta);
  d[1] = v * std::sin(q.theta);
  d[2] = p.wheel_radius * u.u_r;
  d[3] = p.wheel_radius * u.u_l;
  d[4] = (q.v_r - q.v_l) / p.wheel_sep;
  d[5] = 1.0;
  return d;
}

void affine_parts(const RobotState& q, const RobotParams& p, Vec6& f,
                  Mat62& g) {
  const double v = 0.5 * (q.v_r + q.v_l);
  f.setZero();
  f[0] = v * std::cos(q.theta);
  f[1] = v * std::sin(q.theta);
  f[4] = (q.v_r - q.v_l) / p.wheel_sep;
  f[5] = 1.0;
  g.setZero();
  g(2, 0) = p.wheel_radius;
  g(3, 1) = p.wheel_radius;
}

namespace {

Vec6 ode(const Vec6& q, const ControlInput& u, const RobotParams& p) {
  Vec6 d;
  const double v = 0.5 * (q[2] + q[3]);
  d[0] = v * std::cos(q[4]);
  d[1] = v * std::sin(q[4]);
  d[2] = p.wheel_radius * u.u_r;
  d[3] = p.wheel_radius * u.u_l;
  d[4] = (q[2] - q[3]) / p.wheel_sep;
  d[5] = 1.0;
  return d;
}

// Jacobian of the vector field w.r.t. the state.
Mat66 ode_jac(const Vec6& q, const RobotParams& p) {
  Mat66 a = Mat66::Zero();
  const double v = 0.5 * (q[2] + q[3]);
  const double c = std::cos(q[4]);
  const double s = std::sin(q[4]);
  a(0, 2) = 0.5 * c;
  a(0, 3) = 0.5 * c;
  a(0, 4) = -v * s;
  a(1, 2) = 0.5 * s;
  a(1, 3) = 0.5 * s;
  a(1, 4) = v * c;
  a(4, 2) = 1.0 / p.wheel_sep;
  a(4, 3) = -1.0 / p.wheel_sep;
  return a;
}

}  // namespace

Vec6 rk4_step(const Vec6& q, const ControlInput& u, double dt,
              const RobotParams& p) {
  const Vec6 k1 = ode(q, u, p);
  const Vec6 k2 = ode(q + 0.5 * dt * k1, u, p);
  const Vec6 k3 = ode(q + 0.5 * dt * k2, u, p);
  const Vec6 k4 = ode(q + dt * k3, u, p);
  return q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void rk4_step_jacobian(const Vec6& q, const ControlInput& u, double dt,
                       const RobotParams& p, Vec6& next, Mat66& dq,
                       Mat62& du) {
  // The control enters linearly through constant columns, so dki/du chains
  // with the same stage Jacobians as dki/dq.
  Mat62 g = Mat62::Zero();
  g(2, 0) = p.wheel_radius;
  g(3, 1) = p.wheel_radius;

  const Vec6 k1 = ode(q, u, p);
  const Vec6 q2 = q + 0.5 * dt * k1;
  const Vec6 k2 = ode(q2, u, p);
  const Vec6 q3 = q + 0.5 * dt * k2;
  const Vec6 k3 = ode(q3, u, p);
  const Vec6 q4 = q + dt * k3;
  const Vec6 k4 = ode(q4, u, p);
  next = q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  const Mat66 a1 = ode_jac(q, p);
  const Mat66 a2 = ode_jac(q2, p);
  const Mat66 a3 = ode_jac(q3, p);
  const Mat66 a4 = ode_jac(q4, p);

  const Mat66 d1 = a1;
  const Mat66 d2 = a2 * (Mat66::Identity() + 0.5 * dt * d1);
  const Mat66 d3 = a3 * (Mat66::Identity() + 0.5 * dt * d2);
  const Mat66 d4 = a4 * (Mat66::Identity() + dt * d3);
  dq = Mat66::Identity() + (dt / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4);

  const Mat62 e1 = g;
  const Mat62 e2 = a2 * (0.5 * dt * e1) + g;
  const Mat62 e3 = a3 * (0.5 * dt * e2) + g;
  const Mat62 e4 = a4 * (dt * e3) + g;
  du = (dt / 6.0) * (e1 + 2.0 * e2 + 2.0 * e3 + e4);
}

RobotState integrate(const RobotState& q, const ControlInput& u, double dt,
                     const RobotParams& p) {
  RobotState next = RobotState::from_vec(rk4_step(q.vec(), u, dt, p));
  next.v_r = std::clamp(next.v_r, -p.v_max, p.v_max);
  next.v_l = std::clamp(next.v_l, -p.v_max, p.v_max);
  next.theta = wrap_angle(next.theta);
  return next;
}

}  // namespace mrtp
