#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "momo/epipolar.hpp"
#include "momo/manifold.hpp"

namespace momo {

struct GridAxis {
  double min = 0.0;
  double max = 0.0;
  std::size_t steps = 2;  // >= 2, endpoints included

  double at(std::size_t i) const;
  double cell() const { return (max - min) / static_cast<double>(steps - 1); }
};

/// Dense grid over manifold coordinates. Free coordinates without an axis keep
/// their template value.
struct GridSpec {
  std::array<std::optional<GridAxis>, kParamCount> axes;

  /// 41 yaw steps over +-0.3 rad.
  static GridSpec yaw_default();
  GridSpec& with(Param p, GridAxis axis) {
    axes[static_cast<std::size_t>(p)] = axis;
    return *this;
  }
};

/// Deterministic tie-break for grid minima: lower energy, then smaller |yaw|,
/// then smaller arc length, then smaller |pitch|, |roll|.
bool grid_candidate_better(double energy_a, const MotionParams& a, double energy_b, const MotionParams& b);

enum class JacobianMode { Numeric, Analytic };

enum class ConditionNote { OK, ScaleUnobservable, FewMatches };
std::string_view to_string(ConditionNote note);

struct EstimatorOptions {
  MetricKind metric = MetricKind::AnglePlane;
  RobustLoss loss = RobustLoss::cauchy(kDefaultCauchyWidth);
  int max_iterations = 100;
  double gradient_tolerance = 1e-10;
  double step_tolerance = 1e-12;
  std::optional<GridSpec> fallback_grid;
  double damping_init = 1e-4;
  JacobianMode jacobian = JacobianMode::Numeric;
  double jacobian_step = 1e-7;
  std::size_t few_matches_threshold = 10;
  // sqrt(H_ll) * |l| / sqrt(H_yaw,yaw) below this marks the arc length unobservable.
  double scale_observability_threshold = 1e-6;

  /// Throws InvalidArgument on non-positive tolerances or max_iterations < 1.
  void validate() const;
};

struct EstimateResult {
  MotionParams params;
  Pose pose;
  double initial_energy = 0.0;  // at the starting point of the descent
  double final_energy = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  /// One signed residual per input match, in match-set order. AnglePlane:
  /// sine of the angle to the epipolar plane; GeoLine: pixel distance of x1 to
  /// its epipolar line. NaN for skipped matches.
  std::vector<double> residuals;
  std::size_t skipped_matches = 0;
  ConditionNote condition_note = ConditionNote::OK;
  std::vector<double> energy_history;  // accepted energies, starting point first
};

/// Robust damped least-squares descent of multi_camera_energy over the free
/// coordinates of `prior`, starting at the prior (or at the best fallback-grid
/// point when that is lower).
///
/// Throws NoMatches when the sets are empty and DegenerateTranslation when no
/// starting point has a defined epipolar geometry. Failure to converge within
/// max_iterations is reported through `converged`.
EstimateResult estimate(const CameraRig& rig, std::span<const MatchSet> sets, const MotionParams& prior,
                        const EstimatorOptions& opts);

/// Central differences of multi_camera_energy over the free coordinates.
Eigen::VectorXd numeric_gradient(const CameraRig& rig, std::span<const MatchSet> sets, const MotionParams& p,
                                 const RobustLoss& loss, MetricKind metric, double h);

/// The gradient the descent works with: 2 sum_i rho'(s_i) J_i^T r_i, with J
/// from central differences (step `h`) or forward-mode differentiation.
Eigen::VectorXd internal_gradient(const CameraRig& rig, std::span<const MatchSet> sets, const MotionParams& p,
                                  const RobustLoss& loss, MetricKind metric, JacobianMode mode,
                                  double h = 1e-7);

struct LandscapeGrid {
  GridAxis yaw;
  GridAxis arc_length;
};

/// energy(i, j) at yaw.at(i), arc_length.at(j); NaN where the geometry is degenerate.
struct Landscape {
  LandscapeGrid grid;
  Eigen::MatrixXd energy;

  bool degenerate(std::size_t i, std::size_t j) const;
  /// Copy scaled to percent of the largest finite cell.
  Landscape normalized() const;
  /// Grid indices of the minimum (same tie-break as the grid oracle).
  std::pair<std::size_t, std::size_t> argmin() const;
};

Landscape energy_landscape(const CameraRig& rig, std::span<const MatchSet> sets, const LandscapeGrid& grid,
                           const MotionParams& fixed, const RobustLoss& loss, MetricKind metric);

/// mask[i] = |residual_i| <= threshold. An infinite threshold accepts everything,
/// including skipped matches.
std::vector<bool> classify_inliers(const EstimateResult& result, double threshold);

}  // namespace momo
