#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace mrtp {

/// One predicted obstacle position: where something is at time t.
struct SpacetimeSample {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
};

enum class TrackSource : uint8_t { Static, Dynamic, PriorityRobot };

/// A predicted obstacle path. Consecutive samples are linearly interpolated,
/// forming oblique cylinders in (x, y, lambda*t) space. A static obstacle
/// has a single sample that is valid for all t.
struct ObstacleTrack {
  int id = -1;
  TrackSource source = TrackSource::Static;
  std::vector<SpacetimeSample> samples;
};

struct BarrierConfig {
  double d0 = 0.8;     // required clearance between centers [m]
  double gamma = 1.0;  // class-K gain in alpha(B) = gamma * B [1/s]
  double lambda = 2.0; // time axis scale [m/s]; distances mix x, y, lambda*t
  double R = 1.5;      // awareness / communication radius [m]
  double R_l = 0.5;    // hard-constraint radius [m]
  double c0 = 10.0;    // soft weight numerator
  double c1 = 1.0;     // soft weight slope
  double c2 = 1.0;     // soft weight offset
};

/// Euclidean distance from point p to segment [a, b] after mapping
/// (x, y, t) -> (x, y, lambda*t).
double segment_distance(const SpacetimeSample& p, const SpacetimeSample& a,
                        const SpacetimeSample& b, double lambda);

/// Barrier value B = dist(p, track) - d0. For a single-sample static track
/// the distance is planar (the obstacle exists at every t).
double barrier(const SpacetimeSample& p, const ObstacleTrack& track,
               const BarrierConfig& cfg);

/// Barrier plus gradient w.r.t. (x, y, t) of p, taken on the active segment.
double barrier_gradient(const SpacetimeSample& p, const ObstacleTrack& track,
                        const BarrierConfig& cfg, Eigen::Vector3d& grad);

/// One-step decrement condition B_{k+1} - B_k + gamma*dt*B_k; the constraint
/// residual >= 0 keeps B_k >= (1 - gamma*dt)^k * B_0.
double discrete_cbf_residual(double b_k, double b_k1, double gamma, double dt);

/// Linear class-K function used by the barrier condition.
double alpha(double b, double gamma);

enum class ObstacleClass : uint8_t { Hard, Soft, Ignore };

struct WeightFactor {
  ObstacleClass cls = ObstacleClass::Ignore;
  double value = 0.0;  // soft penalty weight; 0 unless cls == Soft
};

/// Proximity weighting: closer than R_l the obstacle must be constrained
/// (Hard), inside [R_l, R] it contributes weight c0 / (c1*rdist + c2),
/// beyond R it is ignored.
WeightFactor weight_factor(double rdist, const BarrierConfig& cfg);

}  // namespace mrtp
