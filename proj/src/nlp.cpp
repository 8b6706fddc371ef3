#include "mrtp/nlp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

namespace mrtp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Eigen::VectorXd project(const Eigen::VectorXd& z, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi) {
  return z.cwiseMax(lo).cwiseMin(hi);
}

double projected_grad_norm(const Eigen::VectorXd& z, const Eigen::VectorXd& g,
                           const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi) {
  return (z - project(z - g, lo, hi)).lpNorm<Eigen::Infinity>();
}

double feasibility(const Eigen::VectorXd& eq, const Eigen::VectorXd& ineq) {
  double v = eq.size() > 0 ? eq.lpNorm<Eigen::Infinity>() : 0.0;
  for (int i = 0; i < ineq.size(); ++i) {
    v = std::max(v, -ineq[i]);
  }
  return v;
}

// Box-projected L-BFGS with Armijo backtracking along projected trials.
struct InnerResult {
  double merit = 0.0;
  double pgrad = 0.0;
  int iters = 0;
};

InnerResult minimize_inner(const AlProblem& problem, Eigen::VectorXd& z,
                           const Eigen::VectorXd& lam,
                           const Eigen::VectorXd& mu, double rho,
                           const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi, double tol, int max_iter,
                           Clock::time_point start, double time_limit,
                           bool* out_of_time) {
  constexpr int kMemory = 8;
  const int n = static_cast<int>(z.size());
  std::vector<Eigen::VectorXd> s_hist, y_hist;
  std::vector<double> rho_hist;

  Eigen::VectorXd grad(n);
  double f = problem.merit(z, lam, mu, rho, &grad);
  InnerResult res;
  for (int it = 0; it < max_iter; ++it) {
    res.pgrad = projected_grad_norm(z, grad, lo, hi);
    if (res.pgrad <= tol) {
      break;
    }
    if (time_limit > 0.0 && seconds_since(start) > time_limit) {
      *out_of_time = true;
      break;
    }

    // Two-loop recursion.
    Eigen::VectorXd d = -grad;
    const int m = static_cast<int>(s_hist.size());
    std::vector<double> alpha(static_cast<std::size_t>(m));
    for (int i = m - 1; i >= 0; --i) {
      alpha[static_cast<std::size_t>(i)] =
          rho_hist[static_cast<std::size_t>(i)] *
          s_hist[static_cast<std::size_t>(i)].dot(d);
      d -= alpha[static_cast<std::size_t>(i)] *
           y_hist[static_cast<std::size_t>(i)];
    }
    if (m > 0) {
      const auto& s = s_hist.back();
      const auto& y = y_hist.back();
      d *= s.dot(y) / y.dot(y);
    }
    for (int i = 0; i < m; ++i) {
      const double beta = rho_hist[static_cast<std::size_t>(i)] *
                          y_hist[static_cast<std::size_t>(i)].dot(d);
      d += (alpha[static_cast<std::size_t>(i)] - beta) *
           s_hist[static_cast<std::size_t>(i)];
    }

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd z_new, grad_new;
    double f_new = f;
    for (int ls = 0; ls < 30; ++ls) {
      z_new = project(z + step * d, lo, hi);
      const Eigen::VectorXd dz = z_new - z;
      if (dz.lpNorm<Eigen::Infinity>() < 1e-16) {
        break;
      }
      const double slope = grad.dot(dz);
      f_new = problem.merit(z_new, lam, mu, rho, nullptr);
      if (f_new <= f + 1e-4 * std::min(slope, 0.0) ||
          (slope >= 0.0 && f_new < f)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Retry once from a steepest-descent step before giving up.
      if (m > 0) {
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        d = -grad;
        step = 1.0 / std::max(1.0, grad.lpNorm<Eigen::Infinity>());
        for (int ls = 0; ls < 30; ++ls) {
          z_new = project(z + step * d, lo, hi);
          const Eigen::VectorXd dz = z_new - z;
          if (dz.lpNorm<Eigen::Infinity>() < 1e-16) break;
          f_new = problem.merit(z_new, lam, mu, rho, nullptr);
          if (f_new < f) {
            accepted = true;
            break;
          }
          step *= 0.5;
        }
      }
      if (!accepted) {
        break;
      }
    }

    grad_new.resize(n);
    f_new = problem.merit(z_new, lam, mu, rho, &grad_new);
    const Eigen::VectorXd s = z_new - z;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      if (static_cast<int>(s_hist.size()) == kMemory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
    }
    z = z_new;
    grad = grad_new;
    f = f_new;
    res.iters = it + 1;
  }
  res.merit = f;
  res.pgrad = projected_grad_norm(z, grad, lo, hi);
  return res;
}

}  // namespace

AlResult solve_al(const AlProblem& problem, const Eigen::VectorXd& z0,
                  const AlOptions& options, const Eigen::VectorXd* lam0,
                  const Eigen::VectorXd* mu0) {
  const auto start = Clock::now();
  const int n = problem.dim();
  const int n_eq = problem.eq_count();
  const int n_ineq = problem.ineq_count();

  Eigen::VectorXd lo(n), hi(n);
  problem.bounds(lo, hi);

  AlResult res;
  res.z = project(z0, lo, hi);
  res.lam = (lam0 && lam0->size() == n_eq) ? *lam0
                                           : Eigen::VectorXd::Zero(n_eq);
  res.mu =
      (mu0 && mu0->size() == n_ineq) ? *mu0 : Eigen::VectorXd::Zero(n_ineq);

  double rho = options.rho0;
  double inner_tol = 1e-3;
  Eigen::VectorXd eq(n_eq), ineq(n_ineq);
  problem.constraints(res.z, eq, ineq);
  double feas = feasibility(eq, ineq);
  double prev_feas = feas;
  double prev_obj = std::numeric_limits<double>::infinity();

  for (int outer = 0; outer < options.max_outer; ++outer) {
    bool out_of_time = false;
    const InnerResult inner = minimize_inner(
        problem, res.z, res.lam, res.mu, rho, lo, hi, inner_tol,
        options.max_inner, start, options.time_limit, &out_of_time);
    res.inner_iters += inner.iters;
    res.outer_iters = outer + 1;

    problem.constraints(res.z, eq, ineq);
    feas = feasibility(eq, ineq);
    res.feas_inf = feas;
    res.pgrad_inf = inner.pgrad;

    if (feas <= options.tol_feas && inner.pgrad <= options.tol_grad) {
      res.converged = true;
      break;
    }
    // Feasible and the objective has stopped moving: further outer rounds
    // only polish the projected gradient, which the caller does not need.
    const double obj = problem.objective(res.z);
    if (feas <= options.tol_feas &&
        std::abs(obj - prev_obj) <= 1e-4 * std::max(1.0, std::abs(obj))) {
      break;
    }
    prev_obj = obj;
    if (out_of_time) {
      res.hit_time_limit = true;
      break;
    }

    // First-order multiplier updates, then tighten.
    res.lam += rho * eq;
    for (int i = 0; i < n_ineq; ++i) {
      res.mu[i] = std::max(0.0, res.mu[i] - rho * ineq[i]);
    }
    if (feas > 0.25 * prev_feas && rho < options.rho_max) {
      rho = std::min(options.rho_max, rho * options.rho_growth);
    }
    prev_feas = feas;
    inner_tol = std::max(1e-9, inner_tol * 0.2);
  }

  res.objective = problem.objective(res.z);
  res.rho_final = rho;
  res.elapsed = seconds_since(start);
  return res;
}

}  // namespace mrtp
