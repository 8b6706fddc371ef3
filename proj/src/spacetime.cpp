#include "mrtp/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mrtp {

namespace {

Eigen::Vector3d lift(const SpacetimeSample& s, double lambda) {
  return {s.x, s.y, lambda * s.t};
}

// Distance and (optionally) the closest point on the lifted segment.
double lifted_segment_distance(const Eigen::Vector3d& p,
                               const Eigen::Vector3d& a,
                               const Eigen::Vector3d& b,
                               Eigen::Vector3d* closest) {
  const Eigen::Vector3d ab = b - a;
  const double len2 = ab.squaredNorm();
  double u = 0.0;
  if (len2 > 0.0) {
    u = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  }
  const Eigen::Vector3d c = a + u * ab;
  if (closest) {
    *closest = c;
  }
  return (p - c).norm();
}

}  // namespace

double segment_distance(const SpacetimeSample& p, const SpacetimeSample& a,
                        const SpacetimeSample& b, double lambda) {
  return lifted_segment_distance(lift(p, lambda), lift(a, lambda),
                                 lift(b, lambda), nullptr);
}

double barrier(const SpacetimeSample& p, const ObstacleTrack& track,
               const BarrierConfig& cfg) {
  Eigen::Vector3d unused;
  return barrier_gradient(p, track, cfg, unused);
}

double barrier_gradient(const SpacetimeSample& p, const ObstacleTrack& track,
                        const BarrierConfig& cfg, Eigen::Vector3d& grad) {
  grad.setZero();
  if (track.samples.empty()) {
    return std::numeric_limits<double>::infinity();
  }
  if (track.samples.size() == 1) {
    // Static: planar distance at whatever time p carries.
    const double dx = p.x - track.samples[0].x;
    const double dy = p.y - track.samples[0].y;
    const double d = std::hypot(dx, dy);
    if (d > 1e-9) {
      grad[0] = dx / d;
      grad[1] = dy / d;
    }
    return d - cfg.d0;
  }

  const Eigen::Vector3d lp = lift(p, cfg.lambda);
  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector3d best_closest = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i + 1 < track.samples.size(); ++i) {
    Eigen::Vector3d c;
    const double d =
        lifted_segment_distance(lp, lift(track.samples[i], cfg.lambda),
                                lift(track.samples[i + 1], cfg.lambda), &c);
    if (d < best) {
      best = d;
      best_closest = c;
    }
  }
  if (best > 1e-9) {
    // Gradient of the active segment's distance; the closest-point
    // parameter is stationary, so only the direct dependence remains.
    const Eigen::Vector3d diff = lp - best_closest;
    grad[0] = diff[0] / best;
    grad[1] = diff[1] / best;
    grad[2] = cfg.lambda * diff[2] / best;  // chain through t -> lambda*t
  }
  return best - cfg.d0;
}

double discrete_cbf_residual(double b_k, double b_k1, double gamma,
                             double dt) {
  return b_k1 - b_k + gamma * dt * b_k;
}

double alpha(double b, double gamma) { return gamma * b; }

WeightFactor weight_factor(double rdist, const BarrierConfig& cfg) {
  if (rdist < cfg.R_l) {
    return {ObstacleClass::Hard, 0.0};
  }
  if (rdist <= cfg.R) {
    return {ObstacleClass::Soft, cfg.c0 / (cfg.c1 * rdist + cfg.c2)};
  }
  return {ObstacleClass::Ignore, 0.0};
}

}  // namespace mrtp
