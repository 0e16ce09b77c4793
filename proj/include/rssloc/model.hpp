#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rssloc/rng.hpp"

namespace rssloc {

using Vec2 = Eigen::Vector2d;

/// Distances below this are clamped before the logarithm so the cost and
/// gradient stay finite when an iterate lands on top of an anchor.
inline constexpr double kMinAnchorDistance = 1e-3;  // meters

/// World description: rectangular region, anchor positions, propagation
/// parameters, per-anchor log-shadowing noise levels.
struct Scenario {
  Vec2 region_min{0.0, 0.0};
  Vec2 region_max{40.0, 40.0};
  std::vector<Vec2> anchors;
  double tx_power_dbm = -10.0;     // P0
  double path_loss_exponent = 3.0; // gamma
  std::vector<double> noise_std_db;

  std::size_t anchor_count() const { return anchors.size(); }

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;

  bool contains(const Vec2& x) const {
    return x.x() >= region_min.x() && x.x() <= region_max.x() &&
           x.y() >= region_min.y() && x.y() <= region_max.y();
  }
};

/// One RSS reading per anchor (dBm) plus the per-anchor noise std (dB)
/// used as weights in the ML cost.
struct Measurement {
  std::vector<double> rss_dbm;
  std::vector<double> noise_std_db;
};

/// Cost value, analytic gradient and per-anchor residuals at one point.
struct CostEval {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
  std::vector<double> residuals;
};

/// Simulate RSS at every anchor for a target at true_position:
///   P_n = P0 - 10*gamma*log10(||x - s_n||) + v_n,  v_n ~ N(0, sigma_n^2).
/// Deterministic given the stream (one gaussian per anchor, in anchor order;
/// no draws when add_noise is false). Throws if the target sits within
/// kMinAnchorDistance of an anchor or outside the region.
Measurement generate_rss(const Scenario& scenario, const Vec2& true_position,
                         RandomStream& rng, bool add_noise = true);

/// Weighted ML cost at x:
///   f(x) = sum_n h_n(x)^2 / sigma_n^2,
///   h_n(x) = P_n - P0 + 10*gamma*log10(||x - s_n||),
/// with the analytic gradient
///   g(x) = (20*gamma/ln10) * sum_n h_n/(sigma_n^2 d_n^2) * (x - s_n).
/// Distances are clamped to kMinAnchorDistance before use.
CostEval cost(const Scenario& scenario, const Measurement& measurement, const Vec2& x);

/// Cost value and gradient only; no residual vector is materialized.
/// Same arithmetic as cost(), shared by the solver hot loops.
void cost_value_gradient(const Scenario& scenario, const Measurement& measurement,
                         const Vec2& x, double& value, Vec2& gradient);

/// Cramer-Rao lower bound for an unbiased position estimator at
/// true_position: sqrt(trace(FIM^-1)) in meters, with
///   FIM = (10*gamma/ln10)^2 * sum_n (x-s_n)(x-s_n)^T / (sigma_n^2 d_n^4).
/// Throws std::domain_error when the geometry is singular (collinear
/// anchor directions).
double crlb(const Scenario& scenario, const Vec2& true_position);

}  // namespace rssloc
