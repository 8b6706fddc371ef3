#include "mrtp/local_planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "mrtp/nlp.hpp"

namespace mrtp {

namespace {

/// Point projection onto the reference polyline: squared distance, arc
/// length of the foot point, and gradients of both w.r.t. the point.
struct PolyProjection {
  double d2 = 0.0;
  Eigen::Vector2d d2_grad = Eigen::Vector2d::Zero();
  double s = 0.0;
  Eigen::Vector2d s_grad = Eigen::Vector2d::Zero();
};

class RefPolyline {
 public:
  explicit RefPolyline(const std::vector<Eigen::Vector2d>& pts) : pts_(pts) {
    if (pts_.empty()) pts_.push_back(Eigen::Vector2d::Zero());
    cum_.resize(pts_.size(), 0.0);
    for (std::size_t i = 1; i < pts_.size(); ++i) {
      cum_[i] = cum_[i - 1] + (pts_[i] - pts_[i - 1]).norm();
    }
  }

  PolyProjection project(const Eigen::Vector2d& p) const {
    PolyProjection best;
    best.d2 = std::numeric_limits<double>::infinity();
    if (pts_.size() == 1) {
      const Eigen::Vector2d diff = p - pts_[0];
      best.d2 = diff.squaredNorm();
      best.d2_grad = 2.0 * diff;
      best.s = 0.0;
      return best;
    }
    for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
      const Eigen::Vector2d a = pts_[i];
      const Eigen::Vector2d ab = pts_[i + 1] - a;
      const double len2 = ab.squaredNorm();
      double tpar = 0.0;
      if (len2 > 1e-18) tpar = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
      const Eigen::Vector2d foot = a + tpar * ab;
      const Eigen::Vector2d diff = p - foot;
      const double d2 = diff.squaredNorm();
      if (d2 < best.d2) {
        best.d2 = d2;
        best.d2_grad = 2.0 * diff;
        const double len = std::sqrt(len2);
        best.s = cum_[i] + tpar * len;
        // Progress is flat once the foot point saturates at a vertex.
        if (tpar > 0.0 && tpar < 1.0 && len > 1e-12) {
          best.s_grad = ab / len;
        } else {
          best.s_grad.setZero();
        }
      }
    }
    return best;
  }

 private:
  std::vector<Eigen::Vector2d> pts_;
  std::vector<double> cum_;
};

/// Direct transcription of the local problem: decision variables are the
/// states q_1..q_{N-1} and controls u_0..u_{N-2}; q_0 is pinned to the
/// measured state. Equalities are the RK4 defects, inequalities the
/// discrete barrier decrements against every hard track.
class LocalNlp : public AlProblem {
 public:
  explicit LocalNlp(const LocalProblem& p) : p_(p), ref_(p.target.reference) {
    n_ = p_.n_points;
    init_ = p_.initial.vec();
    // Decision controls are stored as u * wheel_radius * dt (the velocity
    // change they cause), which keeps the defect Jacobian columns near unit
    // size; raw wheel accelerations would make the penalty Hessian badly
    // conditioned.
    uscale_ = 1.0 / (p_.params.wheel_radius * p_.dt);
    const double t0 = p_.initial.t;
    // Per-point tracking stiffness from soft tracks; hard tracks become
    // constraint rows instead.
    omega_.assign(static_cast<std::size_t>(n_), 1.0);
    for (const ObstacleTrack& track : p_.tracks) {
      const ObstacleClass cls = classify_track(track, p_);
      if (cls == ObstacleClass::Hard) {
        hard_.push_back(&track);
      } else if (cls == ObstacleClass::Soft) {
        for (int k = 0; k < n_; ++k) {
          const SpacetimeSample ref = ref_sample(k, t0);
          const double dist = barrier(ref, track, p_.barrier) + p_.barrier.d0;
          const double clamped = std::max(dist, p_.barrier.R_l);
          const WeightFactor wf = weight_factor(clamped, p_.barrier);
          if (wf.cls == ObstacleClass::Soft) omega_[k] += wf.value;
        }
      }
    }
    b_init_.reserve(hard_.size());
    for (const ObstacleTrack* track : hard_) {
      const SpacetimeSample q0{p_.initial.x, p_.initial.y, p_.initial.t};
      b_init_.push_back(barrier(q0, *track, p_.barrier));
    }
  }

  int hard_count() const { return static_cast<int>(hard_.size()); }

  int dim() const override { return 8 * (n_ - 1); }
  int eq_count() const override { return 6 * (n_ - 1); }
  int ineq_count() const override { return hard_count() * (n_ - 1); }

  int state_off(int k) const { return 6 * (k - 1); }
  int ctrl_off(int k) const { return 6 * (n_ - 1) + 2 * k; }
  double uscale() const { return uscale_; }

  ControlInput control_at(const Eigen::VectorXd& z, int k) const {
    return ControlInput{uscale_ * z[ctrl_off(k)],
                        uscale_ * z[ctrl_off(k) + 1]};
  }

  void bounds(Eigen::VectorXd& lower, Eigen::VectorXd& upper) const override {
    const double inf = std::numeric_limits<double>::infinity();
    lower.setConstant(dim(), -inf);
    upper.setConstant(dim(), inf);
    const double u_lim = p_.params.a_limit / p_.params.wheel_radius / uscale_;
    for (int k = 1; k < n_; ++k) {
      for (int c = 2; c <= 3; ++c) {
        lower[state_off(k) + c] = -p_.v_cruise;
        upper[state_off(k) + c] = p_.v_cruise;
      }
    }
    for (int k = 0; k + 1 < n_; ++k) {
      lower.segment<2>(ctrl_off(k)).setConstant(-u_lim);
      upper.segment<2>(ctrl_off(k)).setConstant(u_lim);
    }
  }

  void constraints(const Eigen::VectorXd& z, Eigen::VectorXd& eq,
                   Eigen::VectorXd& ineq) const override {
    eq.resize(eq_count());
    ineq.resize(ineq_count());
    for (int k = 0; k + 1 < n_; ++k) {
      const Eigen::Matrix<double, 6, 1> qk = state_at(z, k);
      const Eigen::Matrix<double, 6, 1> next =
          rk4_step(qk, control_at(z, k), p_.dt, p_.params);
      eq.segment<6>(6 * k) = z.segment<6>(state_off(k + 1)) - next;
    }
    const double gdt = p_.barrier.gamma * p_.dt;
    for (int h = 0; h < hard_count(); ++h) {
      double b_prev = b_init_[static_cast<std::size_t>(h)];
      for (int k = 0; k + 1 < n_; ++k) {
        const double b_next = barrier(z_sample(z, k + 1), *hard_[h], p_.barrier);
        ineq[h * (n_ - 1) + k] = b_next - b_prev + gdt * b_prev;
        b_prev = b_next;
      }
    }
  }

  double merit(const Eigen::VectorXd& z, const Eigen::VectorXd& lam,
               const Eigen::VectorXd& mu, double rho,
               Eigen::VectorXd* grad) const override {
    if (grad != nullptr) grad->setZero(dim());
    double f = cost(z, grad);

    for (int k = 0; k + 1 < n_; ++k) {
      const Eigen::Matrix<double, 6, 1> qk = state_at(z, k);
      const ControlInput u = control_at(z, k);
      Eigen::Matrix<double, 6, 1> next;
      Eigen::Matrix<double, 6, 6> jq;
      Eigen::Matrix<double, 6, 2> ju;
      if (grad != nullptr) {
        rk4_step_jacobian(qk, u, p_.dt, p_.params, next, jq, ju);
      } else {
        next = rk4_step(qk, u, p_.dt, p_.params);
      }
      const Eigen::Matrix<double, 6, 1> c =
          z.segment<6>(state_off(k + 1)) - next;
      const Eigen::Matrix<double, 6, 1> lam_k = lam.segment<6>(6 * k);
      f += lam_k.dot(c) + 0.5 * rho * c.squaredNorm();
      if (grad != nullptr) {
        const Eigen::Matrix<double, 6, 1> w = lam_k + rho * c;
        grad->segment<6>(state_off(k + 1)) += w;
        if (k > 0) grad->segment<6>(state_off(k)) -= jq.transpose() * w;
        grad->segment<2>(ctrl_off(k)) -= uscale_ * (ju.transpose() * w);
      }
    }

    const double gdt = p_.barrier.gamma * p_.dt;
    std::vector<double> bval(static_cast<std::size_t>(n_));
    std::vector<Eigen::Vector3d> bgrad;
    if (grad != nullptr) bgrad.assign(static_cast<std::size_t>(n_),
                                      Eigen::Vector3d::Zero());
    for (int h = 0; h < hard_count(); ++h) {
      bval[0] = b_init_[static_cast<std::size_t>(h)];
      for (int k = 1; k < n_; ++k) {
        if (grad != nullptr) {
          bval[static_cast<std::size_t>(k)] =
              barrier_gradient(z_sample(z, k), *hard_[h], p_.barrier,
                               bgrad[static_cast<std::size_t>(k)]);
        } else {
          bval[static_cast<std::size_t>(k)] =
              barrier(z_sample(z, k), *hard_[h], p_.barrier);
        }
      }
      for (int k = 0; k + 1 < n_; ++k) {
        const int idx = h * (n_ - 1) + k;
        const double g = bval[static_cast<std::size_t>(k + 1)] +
                         (gdt - 1.0) * bval[static_cast<std::size_t>(k)];
        const double m = std::max(0.0, mu[idx] - rho * g);
        f += (m * m - mu[idx] * mu[idx]) / (2.0 * rho);
        if (grad != nullptr && m > 0.0) {
          add_barrier_grad(*grad, k + 1, -m,
                           bgrad[static_cast<std::size_t>(k + 1)]);
          if (k > 0) {
            add_barrier_grad(*grad, k, -m * (gdt - 1.0),
                             bgrad[static_cast<std::size_t>(k)]);
          }
        }
      }
    }
    return f;
  }

  double objective(const Eigen::VectorXd& z) const override {
    return cost(z, nullptr);
  }

 private:
  SpacetimeSample ref_sample(int k, double t0) const {
    const auto& refs = p_.target.reference;
    Eigen::Vector2d pt = p_.target.goal;
    if (!refs.empty()) {
      pt = refs[std::min<std::size_t>(static_cast<std::size_t>(k),
                                      refs.size() - 1)];
    }
    return SpacetimeSample{pt.x(), pt.y(), t0 + k * p_.dt};
  }

  Eigen::Matrix<double, 6, 1> state_at(const Eigen::VectorXd& z, int k) const {
    if (k == 0) return init_;
    return z.segment<6>(state_off(k));
  }

  SpacetimeSample z_sample(const Eigen::VectorXd& z, int k) const {
    const int off = state_off(k);
    return SpacetimeSample{z[off], z[off + 1], z[off + 5]};
  }

  void add_barrier_grad(Eigen::VectorXd& grad, int k, double scale,
                        const Eigen::Vector3d& g) const {
    const int off = state_off(k);
    grad[off] += scale * g[0];
    grad[off + 1] += scale * g[1];
    grad[off + 5] += scale * g[2];
  }

  double cost(const Eigen::VectorXd& z, Eigen::VectorXd* grad) const {
    const SolverConfig& w = p_.solver;
    double f = 0.0;
    for (int k = 1; k < n_; ++k) {
      const Eigen::Vector2d pos = z.segment<2>(state_off(k));
      const PolyProjection proj = ref_.project(pos);
      const double stiff = w.w_ref * omega_[static_cast<std::size_t>(k)];
      f += stiff * proj.d2 - w.w_prog * proj.s;
      if (grad != nullptr) {
        grad->segment<2>(state_off(k)) +=
            stiff * proj.d2_grad - w.w_prog * proj.s_grad;
      }
    }
    const Eigen::Vector2d tail = z.segment<2>(state_off(n_ - 1));
    const Eigen::Vector2d to_goal = tail - p_.target.goal;
    f += w.w_goal * to_goal.squaredNorm();
    if (grad != nullptr) {
      grad->segment<2>(state_off(n_ - 1)) += 2.0 * w.w_goal * to_goal;
    }
    // Effort is weighted on wheel surface acceleration r*u, so the weight
    // is independent of the wheel radius the commands are expressed in.
    const double rs = p_.params.wheel_radius * uscale_;
    for (int k = 0; k + 1 < n_; ++k) {
      const Eigen::Vector2d u = rs * z.segment<2>(ctrl_off(k));
      f += w.w_u * u.squaredNorm();
      if (grad != nullptr) {
        grad->segment<2>(ctrl_off(k)) += 2.0 * w.w_u * rs * u;
      }
    }
    return f;
  }

  const LocalProblem& p_;
  RefPolyline ref_;
  std::vector<const ObstacleTrack*> hard_;
  std::vector<double> b_init_;
  std::vector<double> omega_;
  Eigen::Matrix<double, 6, 1> init_;
  double uscale_ = 1.0;
  int n_ = 0;
};

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Fallback: return "fallback";
  }
  return "unknown";
}

LocalGoal extract_local_goal(const FittedCurve& curve, double s_now,
                             double dis_f, int n_points) {
  LocalGoal out;
  const double total = curve.total_length();
  const double s0 = std::clamp(s_now, 0.0, total);
  const double s1 = std::min(s0 + dis_f, total);
  out.at_path_end = s0 + dis_f >= total;
  out.goal = curve.eval(curve.param_at_arclength(s1));
  out.reference.reserve(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) {
    const double frac = n_points > 1 ? static_cast<double>(k) / (n_points - 1)
                                     : 1.0;
    const double s = s0 + frac * (s1 - s0);
    out.reference.push_back(curve.eval(curve.param_at_arclength(s)));
  }
  return out;
}

ObstacleClass classify_track(const ObstacleTrack& track,
                             const LocalProblem& problem) {
  if (track.samples.empty()) return ObstacleClass::Ignore;
  double closest = std::numeric_limits<double>::infinity();
  const double t0 = problem.initial.t;
  const auto& refs = problem.target.reference;
  for (int k = 0; k < problem.n_points; ++k) {
    Eigen::Vector2d pt = problem.target.goal;
    if (!refs.empty()) {
      pt = refs[std::min<std::size_t>(static_cast<std::size_t>(k),
                                      refs.size() - 1)];
    }
    const SpacetimeSample sample{pt.x(), pt.y(), t0 + k * problem.dt};
    const double dist =
        barrier(sample, track, problem.barrier) + problem.barrier.d0;
    closest = std::min(closest, dist);
  }
  return weight_factor(closest, problem.barrier).cls;
}

int decision_dim(const LocalProblem& problem) {
  return 8 * (problem.n_points - 1);
}

std::unique_ptr<AlProblem> make_transcription(const LocalProblem& problem) {
  return std::make_unique<LocalNlp>(problem);
}

LocalTrajectory solve(const LocalProblem& problem,
                      const LocalTrajectory* warm_start,
                      SolverSession* session) {
  const auto wall_start = std::chrono::steady_clock::now();
  const int n = problem.n_points;
  LocalNlp nlp(problem);

  Eigen::VectorXd z0(nlp.dim());
  const bool warm = warm_start != nullptr &&
                    static_cast<int>(warm_start->states.size()) == n &&
                    static_cast<int>(warm_start->controls.size()) == n - 1;
  if (warm) {
    for (int k = 1; k < n; ++k) {
      z0.segment<6>(nlp.state_off(k)) =
          warm_start->states[static_cast<std::size_t>(k)].vec();
    }
    for (int k = 0; k + 1 < n; ++k) {
      const ControlInput& u = warm_start->controls[static_cast<std::size_t>(k)];
      z0[nlp.ctrl_off(k)] = u.u_r / nlp.uscale();
      z0[nlp.ctrl_off(k) + 1] = u.u_l / nlp.uscale();
    }
  } else {
    // Coast prediction: zero controls give a defect-free starting chain.
    Eigen::Matrix<double, 6, 1> q = problem.initial.vec();
    for (int k = 1; k < n; ++k) {
      q = rk4_step(q, ControlInput{}, problem.dt, problem.params);
      z0.segment<6>(nlp.state_off(k)) = q;
    }
    for (int k = 0; k + 1 < n; ++k) z0.segment<2>(nlp.ctrl_off(k)).setZero();
  }

  AlOptions opts;
  opts.max_outer = problem.solver.max_outer;
  opts.max_inner = problem.solver.max_inner;
  opts.tol_feas = problem.solver.kkt_tol;
  opts.time_limit =
      problem.solver.enforce_time_limit ? problem.solver.time_limit : 0.0;

  const Eigen::VectorXd* lam0 = nullptr;
  const Eigen::VectorXd* mu0 = nullptr;
  if (session != nullptr) {
    if (session->lam.size() == nlp.eq_count()) lam0 = &session->lam;
    if (session->mu.size() == nlp.ineq_count()) mu0 = &session->mu;
    // Resume near the previous penalty weight instead of re-climbing the
    // whole ladder; back off a little so fresh multipliers can settle.
    if (session->rho > 0.0) {
      opts.rho0 = std::clamp(session->rho / 16.0, opts.rho0, 1e6);
    }
  }
  // Cold starts (no carried duals) need more ladder rounds than resumed
  // solves, where the multipliers already sit near their converged values.
  if (lam0 == nullptr) opts.max_outer += 4;

  const AlResult res = solve_al(nlp, z0, opts, lam0, mu0);
  if (session != nullptr) {
    if (res.feas_inf <= problem.solver.kkt_tol) {
      session->lam = res.lam;
      session->mu = res.mu;
      session->rho = res.rho_final;
    } else {
      // A failed solve leaves multipliers tuned to an unconverged penalty
      // state; carrying them over poisons every following solve.
      session->lam.resize(0);
      session->mu.resize(0);
      session->rho = 0.0;
    }
  }

  LocalTrajectory traj;
  traj.states.resize(static_cast<std::size_t>(n));
  traj.controls.resize(static_cast<std::size_t>(n - 1));
  traj.states[0] = problem.initial;
  for (int k = 1; k < n; ++k) {
    RobotState s = RobotState::from_vec(res.z.segment<6>(nlp.state_off(k)));
    s.theta = wrap_angle(s.theta);
    traj.states[static_cast<std::size_t>(k)] = s;
  }
  for (int k = 0; k + 1 < n; ++k) {
    traj.controls[static_cast<std::size_t>(k)] = nlp.control_at(res.z, k);
  }
  traj.objective = res.objective;
  traj.feas_inf = res.feas_inf;
  traj.outer_iters = res.outer_iters;
  traj.inner_iters = res.inner_iters;
  if (res.converged) {
    traj.status = SolveStatus::Optimal;
  } else if (res.feas_inf <= problem.solver.kkt_tol) {
    traj.status = SolveStatus::Feasible;
  } else {
    traj.status = SolveStatus::Infeasible;
  }
  traj.solve_time = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - wall_start)
                        .count();
  return traj;
}

LocalTrajectory fallback_tail(const LocalTrajectory& previous, double elapsed,
                              double dt) {
  const int n = static_cast<int>(previous.states.size());
  LocalTrajectory out;
  out.status = SolveStatus::Fallback;
  if (n == 0) return out;
  out.states.resize(static_cast<std::size_t>(n));
  out.controls.resize(static_cast<std::size_t>(n > 0 ? n - 1 : 0));
  const double shift = elapsed / dt;
  for (int i = 0; i < n; ++i) {
    const double x = shift + i;
    int j = static_cast<int>(std::floor(x));
    double frac = x - j;
    if (frac > 1.0 - 1e-9) {
      ++j;
      frac = 0.0;
    } else if (frac < 1e-9) {
      frac = 0.0;
    }
    if (j >= n - 1) {
      RobotState s = previous.states[static_cast<std::size_t>(n - 1)];
      s.t += (j - (n - 1) + frac) * dt;
      out.states[static_cast<std::size_t>(i)] = s;
      continue;
    }
    if (frac == 0.0) {
      out.states[static_cast<std::size_t>(i)] =
          previous.states[static_cast<std::size_t>(j)];
      continue;
    }
    const RobotState& a = previous.states[static_cast<std::size_t>(j)];
    const RobotState& b = previous.states[static_cast<std::size_t>(j + 1)];
    RobotState s;
    s.x = a.x + frac * (b.x - a.x);
    s.y = a.y + frac * (b.y - a.y);
    s.v_r = a.v_r + frac * (b.v_r - a.v_r);
    s.v_l = a.v_l + frac * (b.v_l - a.v_l);
    s.theta = wrap_angle(a.theta + frac * wrap_angle(b.theta - a.theta));
    s.t = a.t + frac * (b.t - a.t);
    out.states[static_cast<std::size_t>(i)] = s;
  }
  for (int i = 0; i + 1 < n; ++i) {
    const int src = static_cast<int>(std::floor(shift + i + 1e-9));
    if (src >= 0 && src < n - 1) {
      out.controls[static_cast<std::size_t>(i)] =
          previous.controls[static_cast<std::size_t>(src)];
    } else {
      out.controls[static_cast<std::size_t>(i)] = ControlInput{};
    }
  }
  return out;
}

std::vector<ControlInput> control_signal(const LocalTrajectory& traj,
                                         double dt, double rate) {
  const int per = static_cast<int>(std::lround(dt * rate));
  std::vector<ControlInput> out;
  out.reserve(traj.controls.size() * static_cast<std::size_t>(per));
  for (const ControlInput& u : traj.controls) {
    for (int i = 0; i < per; ++i) out.push_back(u);
  }
  return out;
}

std::vector<ObstacleTrack> ingest_priority_obstacles(
    const std::vector<NeighborPlan>& neighbors, int own_id,
    double own_weight) {
  std::vector<ObstacleTrack> out;
  for (const NeighborPlan& nb : neighbors) {
    if (nb.trajectory == nullptr) continue;
    const bool higher = nb.weight > own_weight ||
                        (nb.weight == own_weight && nb.id < own_id);
    if (!higher) continue;
    ObstacleTrack track;
    track.id = nb.id;
    track.source = TrackSource::PriorityRobot;
    track.samples.reserve(nb.trajectory->states.size());
    for (const RobotState& s : nb.trajectory->states) {
      track.samples.push_back(SpacetimeSample{s.x, s.y, s.t});
    }
    out.push_back(std::move(track));
  }
  return out;
}

}  // namespace mrtp
