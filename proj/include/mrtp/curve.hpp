#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mrtp/grid_map.hpp"

namespace mrtp {

/// Clamped NURBS path through a waypoint sequence.
///
/// The fit interpolates every waypoint under chord-length parameterization.
/// Cubic fits are stored as C1 piecewise Bezier segments (interior knots of
/// multiplicity 3), which gives the refinement step an exact locality
/// guarantee: splitting a span never moves the curve outside that span.
/// Weights are stored but currently all ones (reserved column).
struct FittedCurve {
  int degree = 3;
  std::vector<double> knots;
  std::vector<Eigen::Vector2d> ctrl;
  std::vector<double> weights;

  // Interpolated points and their parameters (subset of the knot values).
  std::vector<Eigen::Vector2d> fit_points;
  std::vector<double> fit_params;

  // Cumulative arc length sampled at 64 subintervals per span, Gauss
  // quadrature within each subinterval, linear interpolation between rows.
  std::vector<double> table_u;
  std::vector<double> table_s;

  Eigen::Vector2d eval(double u) const;
  Eigen::Vector2d derivative(double u) const;

  double total_length() const { return table_s.empty() ? 0.0 : table_s.back(); }
  double param_at_arclength(double s) const;
  WorldPoint point_at_arclength(double s) const;
  double arclength_at_param(double u) const;

  /// Arc length of the closest curve point, searched within
  /// [s_hint - back, s_hint + ahead] on the arc table grid.
  double project(WorldPoint p, double s_hint, double back, double ahead) const;

  void rebuild_arclength_table();
};

/// Interpolating fit. Degree is min(3, n-1): two waypoints produce a
/// segment, three a parabolic arc, four or more the piecewise cubic.
/// Consecutive waypoints must be distinct.
FittedCurve fit_curve(const std::vector<Eigen::Vector2d>& waypoints);

/// Degree-1 interpolation of the waypoints (used as the refinement
/// fallback; exact and trivially collision-free between free waypoints).
FittedCurve fit_polyline(const std::vector<Eigen::Vector2d>& waypoints);

/// Splits fit span `span` (between fit_points[span] and fit_points[span+1])
/// at the new interpolation point, leaving the curve outside the span
/// bit-identical. The point's parameter follows chord proportions.
FittedCurve insert_fit_point(const FittedCurve& curve, int span,
                             const Eigen::Vector2d& point);

enum class RefineStatus {
  Clean,             // input curve already collision-free
  Refined,           // one or more spans were split
  FallbackPolyline,  // insertion cap hit; polyline returned instead
};

struct RefineResult {
  FittedCurve curve;
  RefineStatus status = RefineStatus::Clean;
  int insertions = 0;
};

/// Collision-driven refinement: while some span's curve samples touch an
/// occupied cell, insert the chord midpoint of that span's fit points and
/// re-check. Each original span tolerates at most `max_insertions_per_span`
/// splits before the whole curve falls back to the waypoint polyline.
/// Precondition: consecutive waypoint chords are collision-free.
RefineResult ccd_refine(const FittedCurve& curve, const OccupancyGrid& grid,
                        int max_insertions_per_span = 8);

}  // namespace mrtp
