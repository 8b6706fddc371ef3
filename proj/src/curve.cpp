#include "mrtp/curve.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace mrtp {

namespace {

// 5-point Gauss-Legendre rule on [-1, 1].
constexpr double kGaussNode[5] = {-0.9061798459386640, -0.5384693101056831,
                                  0.0, 0.5384693101056831,
                                  0.9061798459386640};
constexpr double kGaussWeight[5] = {0.2369268850561891, 0.4786286704993665,
                                    0.5688888888888889, 0.4786286704993665,
                                    0.2369268850561891};

int find_span(const std::vector<double>& knots, int degree, double u) {
  const int n = static_cast<int>(knots.size()) - degree - 2;  // last ctrl idx
  if (u >= knots[static_cast<std::size_t>(n + 1)]) {
    // Clamp to the last non-empty span so u == 1 evaluates cleanly.
    int span = n;
    while (span > degree &&
           knots[static_cast<std::size_t>(span)] ==
               knots[static_cast<std::size_t>(span + 1)]) {
      --span;
    }
    return span;
  }
  if (u <= knots[static_cast<std::size_t>(degree)]) {
    int span = degree;
    while (knots[static_cast<std::size_t>(span + 1)] ==
           knots[static_cast<std::size_t>(span)]) {
      ++span;
    }
    return span;
  }
  int lo = degree;
  int hi = n + 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (u < knots[static_cast<std::size_t>(mid)]) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

// Cox-de Boor recurrence; fills N[0..degree] for the given span.
void basis_funs(const std::vector<double>& knots, int degree, int span,
                double u, double* N) {
  double left[8];
  double right[8];
  N[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = u - knots[static_cast<std::size_t>(span + 1 - j)];
    right[j] = knots[static_cast<std::size_t>(span + j)] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = N[r] / (right[r + 1] + left[j - r]);
      N[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    N[j] = saved;
  }
}

// First derivatives of the degree-p basis functions active on `span`.
void basis_derivs(const std::vector<double>& knots, int degree, int span,
                  double u, double* dN) {
  if (degree == 0) {
    dN[0] = 0.0;
    return;
  }
  double lower[8] = {0};
  basis_funs(knots, degree - 1, span, u, lower);
  // lower[j] corresponds to basis index span - degree + 1 + j.
  for (int r = 0; r <= degree; ++r) {
    const int i = span - degree + r;
    double a = 0.0;
    if (r > 0) {
      const double den = knots[static_cast<std::size_t>(i + degree)] -
                         knots[static_cast<std::size_t>(i)];
      if (den > 0.0) a += lower[r - 1] / den;
    }
    double b = 0.0;
    if (r < degree) {
      const double den = knots[static_cast<std::size_t>(i + degree + 1)] -
                         knots[static_cast<std::size_t>(i + 1)];
      if (den > 0.0) b += lower[r] / den;
    }
    dN[r] = degree * (a - b);
  }
}

// Derivative at u_at of the parabola through three parameter/point pairs.
Eigen::Vector2d parabola_deriv(double u0, const Eigen::Vector2d& p0, double u1,
                               const Eigen::Vector2d& p1, double u2,
                               const Eigen::Vector2d& p2, double u_at) {
  const double d0 = (2.0 * u_at - u1 - u2) / ((u0 - u1) * (u0 - u2));
  const double d1 = (2.0 * u_at - u0 - u2) / ((u1 - u0) * (u1 - u2));
  const double d2 = (2.0 * u_at - u0 - u1) / ((u2 - u0) * (u2 - u1));
  return d0 * p0 + d1 * p1 + d2 * p2;
}

std::vector<double> chord_params(const std::vector<Eigen::Vector2d>& pts) {
  std::vector<double> u(pts.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double d = (pts[i] - pts[i - 1]).norm();
    if (!(d > 0.0)) {
      throw std::invalid_argument("consecutive fit waypoints must be distinct");
    }
    total += d;
    u[i] = total;
  }
  for (double& v : u) {
    v /= total;
  }
  u.back() = 1.0;
  return u;
}

// Rebuilds the triple-knot vector of a piecewise cubic from its fit params.
std::vector<double> cubic_knots(const std::vector<double>& params) {
  std::vector<double> knots;
  knots.insert(knots.end(), 4, 0.0);
  for (std::size_t i = 1; i + 1 < params.size(); ++i) {
    knots.insert(knots.end(), 3, params[i]);
  }
  knots.insert(knots.end(), 4, 1.0);
  return knots;
}

}  // namespace

Eigen::Vector2d FittedCurve::eval(double u) const {
  const int span = find_span(knots, degree, u);
  double N[8];
  basis_funs(knots, degree, span, u, N);
  Eigen::Vector2d a = Eigen::Vector2d::Zero();
  double w = 0.0;
  for (int r = 0; r <= degree; ++r) {
    const std::size_t i = static_cast<std::size_t>(span - degree + r);
    a += N[r] * weights[i] * ctrl[i];
    w += N[r] * weights[i];
  }
  return a / w;
}

Eigen::Vector2d FittedCurve::derivative(double u) const {
  const int span = find_span(knots, degree, u);
  double N[8];
  double dN[8];
  basis_funs(knots, degree, span, u, N);
  basis_derivs(knots, degree, span, u, dN);
  Eigen::Vector2d a = Eigen::Vector2d::Zero();
  Eigen::Vector2d da = Eigen::Vector2d::Zero();
  double w = 0.0;
  double dw = 0.0;
  for (int r = 0; r <= degree; ++r) {
    const std::size_t i = static_cast<std::size_t>(span - degree + r);
    a += N[r] * weights[i] * ctrl[i];
    da += dN[r] * weights[i] * ctrl[i];
    w += N[r] * weights[i];
    dw += dN[r] * weights[i];
  }
  const Eigen::Vector2d c = a / w;
  return (da - dw * c) / w;
}

void FittedCurve::rebuild_arclength_table() {
  table_u.clear();
  table_s.clear();
  table_u.push_back(0.0);
  table_s.push_back(0.0);
  double s = 0.0;
  // Distinct knot intervals delimit the polynomial spans.
  std::vector<double> breaks;
  breaks.push_back(knots.front());
  for (double k : knots) {
    if (k > breaks.back()) {
      breaks.push_back(k);
    }
  }
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double ua = breaks[b];
    const double ub = breaks[b + 1];
    const int kSub = 64;
    for (int j = 0; j < kSub; ++j) {
      const double a = ua + (ub - ua) * j / kSub;
      const double c = ua + (ub - ua) * (j + 1) / kSub;
      const double half = 0.5 * (c - a);
      const double mid = 0.5 * (a + c);
      double seg = 0.0;
      for (int g = 0; g < 5; ++g) {
        seg += kGaussWeight[g] * derivative(mid + half * kGaussNode[g]).norm();
      }
      s += seg * half;
      table_u.push_back(c);
      table_s.push_back(s);
    }
  }
}

double FittedCurve::param_at_arclength(double s) const {
  if (table_s.empty()) return 0.0;
  s = std::clamp(s, 0.0, table_s.back());
  const auto it = std::upper_bound(table_s.begin(), table_s.end(), s);
  if (it == table_s.begin()) return table_u.front();
  if (it == table_s.end()) return table_u.back();
  const std::size_t hi = static_cast<std::size_t>(it - table_s.begin());
  const std::size_t lo = hi - 1;
  const double ds = table_s[hi] - table_s[lo];
  const double frac = ds > 0.0 ? (s - table_s[lo]) / ds : 0.0;
  return table_u[lo] + frac * (table_u[hi] - table_u[lo]);
}

WorldPoint FittedCurve::point_at_arclength(double s) const {
  const Eigen::Vector2d p = eval(param_at_arclength(s));
  return {p.x(), p.y()};
}

double FittedCurve::arclength_at_param(double u) const {
  if (table_u.empty()) return 0.0;
  u = std::clamp(u, table_u.front(), table_u.back());
  const auto it = std::upper_bound(table_u.begin(), table_u.end(), u);
  if (it == table_u.begin()) return table_s.front();
  if (it == table_u.end()) return table_s.back();
  const std::size_t hi = static_cast<std::size_t>(it - table_u.begin());
  const std::size_t lo = hi - 1;
  const double du = table_u[hi] - table_u[lo];
  const double frac = du > 0.0 ? (u - table_u[lo]) / du : 0.0;
  return table_s[lo] + frac * (table_s[hi] - table_s[lo]);
}

double FittedCurve::project(WorldPoint p, double s_hint, double back,
                            double ahead) const {
  const Eigen::Vector2d q(p.x, p.y);
  const double lo = std::max(0.0, s_hint - back);
  const double hi = std::min(total_length(), s_hint + ahead);
  // Coarse scan on the arc table grid, then a parabolic touch-up.
  const auto begin = std::lower_bound(table_s.begin(), table_s.end(), lo);
  const auto end = std::upper_bound(table_s.begin(), table_s.end(), hi);
  double best_s = std::clamp(s_hint, 0.0, total_length());
  double best_d = (eval(param_at_arclength(best_s)) - q).squaredNorm();
  for (auto it = begin; it != end; ++it) {
    const std::size_t i = static_cast<std::size_t>(it - table_s.begin());
    const double d = (eval(table_u[i]) - q).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best_s = table_s[i];
    }
  }
  // Refine between neighbouring table rows by ternary search.
  double a = std::max(lo, best_s - 0.05);
  double b = std::min(hi, best_s + 0.05);
  for (int iter = 0; iter < 24; ++iter) {
    const double m1 = a + (b - a) / 3.0;
    const double m2 = b - (b - a) / 3.0;
    const double d1 = (eval(param_at_arclength(m1)) - q).squaredNorm();
    const double d2 = (eval(param_at_arclength(m2)) - q).squaredNorm();
    if (d1 < d2) {
      b = m2;
    } else {
      a = m1;
    }
  }
  const double s_ref = 0.5 * (a + b);
  if ((eval(param_at_arclength(s_ref)) - q).squaredNorm() < best_d) {
    best_s = s_ref;
  }
  return best_s;
}

FittedCurve fit_polyline(const std::vector<Eigen::Vector2d>& waypoints) {
  if (waypoints.size() < 2) {
    throw std::invalid_argument("fit needs at least two waypoints");
  }
  FittedCurve c;
  c.degree = 1;
  c.fit_points = waypoints;
  c.fit_params = chord_params(waypoints);
  c.ctrl = waypoints;
  c.weights.assign(waypoints.size(), 1.0);
  c.knots.push_back(0.0);
  c.knots.insert(c.knots.end(), c.fit_params.begin(), c.fit_params.end());
  c.knots.push_back(1.0);
  c.rebuild_arclength_table();
  return c;
}

FittedCurve fit_curve(const std::vector<Eigen::Vector2d>& waypoints) {
  const std::size_t n = waypoints.size();
  if (n < 2) {
    throw std::invalid_argument("fit needs at least two waypoints");
  }
  if (n == 2) {
    return fit_polyline(waypoints);
  }

  FittedCurve c;
  c.fit_points = waypoints;
  c.fit_params = chord_params(waypoints);

  if (n == 3) {
    // Single parabolic arc through three points.
    c.degree = 2;
    const double t = c.fit_params[1];
    const Eigen::Vector2d b1 = (waypoints[1] - (1.0 - t) * (1.0 - t) * waypoints[0] -
                                t * t * waypoints[2]) /
                               (2.0 * t * (1.0 - t));
    c.ctrl = {waypoints[0], b1, waypoints[2]};
    c.weights.assign(3, 1.0);
    c.knots = {0.0, 0.0, 0.0, 1.0, 1.0, 1.0};
    c.rebuild_arclength_table();
    return c;
  }

  // Piecewise cubic Hermite in Bezier form. Tangents come from the local
  // parabola through each point and its neighbours, so the fit both
  // interpolates exactly and keeps every span locally determined.
  c.degree = 3;
  const auto& u = c.fit_params;
  std::vector<Eigen::Vector2d> tangent(n);
  tangent[0] = parabola_deriv(u[0], waypoints[0], u[1], waypoints[1], u[2],
                              waypoints[2], u[0]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    tangent[i] = parabola_deriv(u[i - 1], waypoints[i - 1], u[i], waypoints[i],
                                u[i + 1], waypoints[i + 1], u[i]);
  }
  tangent[n - 1] = parabola_deriv(u[n - 3], waypoints[n - 3], u[n - 2],
                                  waypoints[n - 2], u[n - 1], waypoints[n - 1],
                                  u[n - 1]);

  c.knots = cubic_knots(u);
  c.ctrl.reserve(3 * (n - 1) + 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double du = u[i + 1] - u[i];
    c.ctrl.push_back(waypoints[i]);
    c.ctrl.push_back(waypoints[i] + (du / 3.0) * tangent[i]);
    c.ctrl.push_back(waypoints[i + 1] - (du / 3.0) * tangent[i + 1]);
  }
  c.ctrl.push_back(waypoints[n - 1]);
  c.weights.assign(c.ctrl.size(), 1.0);
  c.rebuild_arclength_table();
  return c;
}

FittedCurve insert_fit_point(const FittedCurve& curve, int span,
                             const Eigen::Vector2d& point) {
  const std::size_t n = curve.fit_points.size();
  if (span < 0 || static_cast<std::size_t>(span) + 1 >= n) {
    throw std::out_of_range("fit span out of range");
  }
  if (curve.degree != 3) {
    // Short curves have no span-local structure; refit from scratch.
    std::vector<Eigen::Vector2d> pts = curve.fit_points;
    pts.insert(pts.begin() + span + 1, point);
    return fit_curve(pts);
  }

  const double ua = curve.fit_params[static_cast<std::size_t>(span)];
  const double ub = curve.fit_params[static_cast<std::size_t>(span) + 1];
  const double du = ub - ua;
  const Eigen::Vector2d pa = curve.fit_points[static_cast<std::size_t>(span)];
  const Eigen::Vector2d pb =
      curve.fit_points[static_cast<std::size_t>(span) + 1];

  // Existing Hermite data at the span ends, read straight off the Bezier
  // control points so the outer spans stay untouched.
  const std::size_t base = static_cast<std::size_t>(3 * span);
  const Eigen::Vector2d ta = 3.0 * (curve.ctrl[base + 1] - curve.ctrl[base]) / du;
  const Eigen::Vector2d tb =
      3.0 * (curve.ctrl[base + 3] - curve.ctrl[base + 2]) / du;

  const double la = (point - pa).norm();
  const double lb = (pb - point).norm();
  if (!(la > 0.0) || !(lb > 0.0)) {
    throw std::invalid_argument("inserted point must split the chord");
  }
  const double um = ua + du * la / (la + lb);
  const Eigen::Vector2d tm =
      parabola_deriv(ua, pa, um, point, ub, pb, um);

  FittedCurve out = curve;
  out.fit_points.insert(out.fit_points.begin() + span + 1, point);
  out.fit_params.insert(out.fit_params.begin() + span + 1, um);
  out.knots = cubic_knots(out.fit_params);

  const double d1 = um - ua;
  const double d2 = ub - um;
  const std::vector<Eigen::Vector2d> repl = {
      pa + (d1 / 3.0) * ta, point - (d1 / 3.0) * tm,
      point,
      point + (d2 / 3.0) * tm, pb - (d2 / 3.0) * tb};
  out.ctrl.erase(out.ctrl.begin() + static_cast<long>(base) + 1,
                 out.ctrl.begin() + static_cast<long>(base) + 3);
  out.ctrl.insert(out.ctrl.begin() + static_cast<long>(base) + 1, repl.begin(),
                  repl.end());
  out.weights.assign(out.ctrl.size(), 1.0);
  out.rebuild_arclength_table();
  return out;
}

namespace {

// First curve sample (arc spacing <= 0.2 cell) inside an occupied or
// out-of-bounds cell, or -1 when the span is clear.
int span_collides(const FittedCurve& curve, const OccupancyGrid& grid,
                  int span) {
  const double sa =
      curve.arclength_at_param(curve.fit_params[static_cast<std::size_t>(span)]);
  const double sb = curve.arclength_at_param(
      curve.fit_params[static_cast<std::size_t>(span) + 1]);
  const double step = 0.2 * grid.resolution();
  const int k = std::max(2, static_cast<int>(std::ceil((sb - sa) / step)));
  for (int j = 0; j <= k; ++j) {
    const double s = sa + (sb - sa) * j / k;
    const Eigen::Vector2d p = curve.eval(curve.param_at_arclength(s));
    const auto cell = grid.world_to_cell({p.x(), p.y()});
    if (!cell || grid.occupied(*cell)) {
      return j;
    }
  }
  return -1;
}

}  // namespace

RefineResult ccd_refine(const FittedCurve& curve, const OccupancyGrid& grid,
                        int max_insertions_per_span) {
  RefineResult result;
  result.curve = curve;
  // Each current span remembers which original span it came from so the
  // insertion budget is charged against the original geometry.
  std::vector<int> ancestor(curve.fit_points.size() - 1);
  for (std::size_t i = 0; i < ancestor.size(); ++i) {
    ancestor[i] = static_cast<int>(i);
  }
  std::vector<int> spent(ancestor.size(), 0);

  int span = 0;
  while (span < static_cast<int>(result.curve.fit_points.size()) - 1) {
    if (span_collides(result.curve, grid, span) < 0) {
      ++span;
      continue;
    }
    const int origin = ancestor[static_cast<std::size_t>(span)];
    if (spent[static_cast<std::size_t>(origin)] >= max_insertions_per_span) {
      result.status = RefineStatus::FallbackPolyline;
      result.curve = fit_polyline(result.curve.fit_points);
      return result;
    }
    spent[static_cast<std::size_t>(origin)]++;
    const Eigen::Vector2d mid =
        0.5 * (result.curve.fit_points[static_cast<std::size_t>(span)] +
               result.curve.fit_points[static_cast<std::size_t>(span) + 1]);
    result.curve = insert_fit_point(result.curve, span, mid);
    ancestor.insert(ancestor.begin() + span, origin);
    result.insertions++;
    // Re-check from the first of the two new sub-spans.
  }
  result.status =
      result.insertions > 0 ? RefineStatus::Refined : RefineStatus::Clean;
  return result;
}

}  // namespace mrtp
