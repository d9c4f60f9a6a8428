#include "momo/epipolar.hpp"

#include <cmath>
#include <string>

#include "momo/detail/kernels.hpp"

namespace momo {

FeatureMatch FeatureMatch::from_pixels(const CameraModel& model, PixelPoint p0, PixelPoint p1) {
  return {p0, p1, bearing_from_pixel(model, p0), bearing_from_pixel(model, p1)};
}

FeatureMatch FeatureMatch::from_parts(const CameraModel& model, PixelPoint p0, PixelPoint p1,
                                      const Bearing& b0, const Bearing& b1) {
  const Vec3 e0 = bearing_from_pixel(model, p0).direction();
  const Vec3 e1 = bearing_from_pixel(model, p1).direction();
  if ((e0 - b0.direction()).norm() > 1e-9 || (e1 - b1.direction()).norm() > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "bearings do not match their pixels under the camera model");
  }
  return {p0, p1, b0, b1};
}

void RobustLoss::validate() const {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw Error(ErrorCode::InvalidArgument, "robust loss width must be positive and finite");
  }
}

LossValue robust_loss_eval(const RobustLoss& loss, double s) {
  const double c2 = loss.width * loss.width;
  switch (loss.kind) {
    case LossKind::None:
      return {s, 1.0};
    case LossKind::Cauchy: {
      const double ratio = s / c2;
      return {c2 * std::log1p(ratio), 1.0 / (1.0 + ratio)};
    }
    case LossKind::Huber: {
      if (s <= c2) return {s, 1.0};
      const double r = std::sqrt(s);
      return {2.0 * loss.width * r - c2, loss.width / r};
    }
    case LossKind::Tukey: {
      if (s > c2) return {c2 / 3.0, 0.0};
      const double q = 1.0 - s / c2;
      return {c2 / 3.0 * (1.0 - q * q * q), q * q};
    }
  }
  return {s, 1.0};
}

double epipolar_line_distance(const FundamentalMatrix& f, PixelPoint x0, PixelPoint x1) {
  const Vec3 line = f.m * x0.homogeneous();
  const double n = std::hypot(line.x(), line.y());
  if (!(n >= kEpipoleDegenerate)) {
    throw Error(ErrorCode::EpipoleDegenerate, "pixel maps to the epipole");
  }
  return x1.homogeneous().dot(line) / n;
}

double angleplane_residual(const EssentialMatrix& e, const Bearing& b0, const Bearing& b1) {
  double r = 0.0;
  if (!detail::angleplane_residual_t<double>(e.m, b0.direction(), b1.direction(), r)) {
    throw Error(ErrorCode::EpipoleDegenerate, "bearing maps to the epipole");
  }
  return r;
}

EnergyValue geoline_energy(const FundamentalMatrix& f, const MatchSet& set, const RobustLoss& loss) {
  CompensatedSum sum;
  EnergyValue out;
  for (const auto& m : set.matches) {
    double d1 = 0.0;
    double d0 = 0.0;
    if (!detail::geoline_residuals_t<double>(f.m, m.pixel_t0.homogeneous(), m.pixel_t1.homogeneous(), d1,
                                             d0)) {
      ++out.skipped;
      continue;
    }
    sum.add(robust_loss_eval(loss, d1 * d1 + d0 * d0).value);
    ++out.used;
  }
  out.energy = sum.value();
  return out;
}

EnergyValue angleplane_energy(const EssentialMatrix& e, const MatchSet& set, const RobustLoss& loss) {
  CompensatedSum sum;
  EnergyValue out;
  for (const auto& m : set.matches) {
    double r = 0.0;
    if (!detail::angleplane_residual_t<double>(e.m, m.bearing_t0.direction(), m.bearing_t1.direction(), r)) {
      ++out.skipped;
      continue;
    }
    sum.add(robust_loss_eval(loss, r * r).value);
    ++out.used;
  }
  out.energy = sum.value();
  return out;
}

}  // namespace momo
