#pragma once

#include <Eigen/Dense>

namespace mrtp {

/// Problem hook for the augmented-Lagrangian solver. Equality constraints
/// are driven to zero, inequalities to g(z) >= 0, and simple bounds are
/// enforced exactly by projection.
class AlProblem {
 public:
  virtual ~AlProblem() = default;

  virtual int dim() const = 0;
  virtual int eq_count() const = 0;
  virtual int ineq_count() const = 0;
  virtual void bounds(Eigen::VectorXd& lower, Eigen::VectorXd& upper) const = 0;

  virtual void constraints(const Eigen::VectorXd& z, Eigen::VectorXd& eq,
                           Eigen::VectorXd& ineq) const = 0;

  /// Augmented Lagrangian merit value; fills the gradient when requested.
  /// Implementations own the structure-exploiting gradient assembly.
  virtual double merit(const Eigen::VectorXd& z, const Eigen::VectorXd& lam,
                       const Eigen::VectorXd& mu, double rho,
                       Eigen::VectorXd* grad) const = 0;

  virtual double objective(const Eigen::VectorXd& z) const = 0;
};

struct AlOptions {
  int max_outer = 12;
  int max_inner = 150;
  double tol_feas = 1e-7;
  double tol_grad = 1e-5;
  double rho0 = 100.0;
  double rho_growth = 4.0;
  double rho_max = 1e8;
  double time_limit = 0.0;  // seconds of wall clock; 0 disables the check
};

struct AlResult {
  Eigen::VectorXd z;
  Eigen::VectorXd lam;
  Eigen::VectorXd mu;
  double objective = 0.0;
  double feas_inf = 0.0;   // max constraint violation at z
  double pgrad_inf = 0.0;  // projected gradient norm at z
  double rho_final = 0.0;  // penalty weight when the loop stopped
  int outer_iters = 0;
  int inner_iters = 0;
  bool converged = false;
  bool hit_time_limit = false;
  double elapsed = 0.0;
};

/// Classic PHR augmented Lagrangian with a box-projected L-BFGS inner
/// solver. Multiplier vectors in `lam0`/`mu0` (when sized correctly) warm
/// start the duals.
AlResult solve_al(const AlProblem& problem, const Eigen::VectorXd& z0,
                  const AlOptions& options,
                  const Eigen::VectorXd* lam0 = nullptr,
                  const Eigen::VectorXd* mu0 = nullptr);

}  // namespace mrtp
