#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "momo/camera.hpp"
#include "momo/geometry.hpp"

namespace momo {

/// A pixel correspondence between tau0 and tau1 together with its lines of sight.
struct FeatureMatch {
  PixelPoint pixel_t0;
  PixelPoint pixel_t1;
  Bearing bearing_t0;
  Bearing bearing_t1;

  /// Lifts both pixels through `model`.
  static FeatureMatch from_pixels(const CameraModel& model, PixelPoint p0, PixelPoint p1);
  /// Checks that the bearings are the images of the pixels within 1e-9; throws InvalidArgument otherwise.
  static FeatureMatch from_parts(const CameraModel& model, PixelPoint p0, PixelPoint p1, const Bearing& b0,
                                 const Bearing& b1);
};

struct MatchSet {
  int camera_id = 0;
  std::vector<FeatureMatch> matches;
};

enum class LossKind { None, Cauchy, Huber, Tukey };

/// Robust loss on squared residuals. `width` is in residual units: sine of angle
/// for AnglePlane, pixels for GeoLine.
struct RobustLoss {
  LossKind kind = LossKind::None;
  double width = 1.0;

  static RobustLoss none() { return {LossKind::None, 1.0}; }
  static RobustLoss cauchy(double width) { return {LossKind::Cauchy, width}; }
  static RobustLoss huber(double width) { return {LossKind::Huber, width}; }
  static RobustLoss tukey(double width) { return {LossKind::Tukey, width}; }

  void validate() const;
};

inline constexpr double kDefaultCauchyWidth = 0.0065;

struct LossValue {
  double value = 0.0;
  double derivative = 1.0;  // d rho / d s
};

/// rho(s) and rho'(s) on a squared residual s >= 0. All kinds satisfy
/// rho(0) = 0 and rho'(0) = 1.
///   Cauchy: c^2 ln(1 + s/c^2)
///   Huber:  s for s <= c^2, else 2c sqrt(s) - c^2
///   Tukey:  c^2/3 (1 - (1 - s/c^2)^3) for s <= c^2, else c^2/3
LossValue robust_loss_eval(const RobustLoss& loss, double squared_residual);

enum class MetricKind { GeoLine, AnglePlane };

inline constexpr double kEpipoleDegenerate = 1e-12;

/// Signed distance of x1 to the epipolar line F x0, in pixels.
/// Throws EpipoleDegenerate when x0 maps to the epipole.
double epipolar_line_distance(const FundamentalMatrix& f, PixelPoint x0, PixelPoint x1);

/// Signed sine of the angle between b1 and the epipolar plane with normal E b0.
/// Throws EpipoleDegenerate when |E b0| < 1e-12.
double angleplane_residual(const EssentialMatrix& e, const Bearing& b0, const Bearing& b1);

struct EnergyValue {
  double energy = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;  // degenerate matches left out of the sum
};

/// Symmetric squared line distance per match, robustified per match.
EnergyValue geoline_energy(const FundamentalMatrix& f, const MatchSet& set, const RobustLoss& loss);

/// Squared AnglePlane residual per match, robustified per match.
EnergyValue angleplane_energy(const EssentialMatrix& e, const MatchSet& set, const RobustLoss& loss);

/// Neumaier-compensated running sum with a fixed evaluation order.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace momo
