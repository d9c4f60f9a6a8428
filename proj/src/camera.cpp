#include "momo/camera.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>

namespace momo {

namespace {

constexpr double kPlanarMinZ = 1e-3;
constexpr double kDomainSlack = 1e-9;

}  // namespace

BearingTable::BearingTable(std::size_t cols, std::size_t rows, double origin_u, double origin_v,
                           double step_u, double step_v, std::vector<Vec3> bearings)
    : cols_(cols),
      rows_(rows),
      origin_u_(origin_u),
      origin_v_(origin_v),
      step_u_(step_u),
      step_v_(step_v),
      bearings_(std::move(bearings)) {
  if (cols_ < 2 || rows_ < 2) {
    throw Error(ErrorCode::CalibrationInvalid, "bearing table needs at least 2x2 nodes");
  }
  if (!(step_u_ > 0.0) || !(step_v_ > 0.0)) {
    throw Error(ErrorCode::CalibrationInvalid, "bearing table steps must be positive");
  }
  if (bearings_.size() != cols_ * rows_) {
    throw Error(ErrorCode::CalibrationInvalid,
                "bearing table has " + std::to_string(bearings_.size()) + " entries, expected " +
                    std::to_string(cols_ * rows_));
  }
  planar_ = true;
  for (auto& b : bearings_) {
    const double n = b.norm();
    if (!(n > 0.0) || !b.allFinite()) {
      throw Error(ErrorCode::CalibrationInvalid, "bearing table entry is zero or non-finite");
    }
    b /= n;
    planar_ = planar_ && b.z() > kPlanarMinZ;
  }
  nodes_.reserve(bearings_.size());
  for (const auto& b : bearings_) {
    nodes_.push_back(planar_ ? Vec3(b.x() / b.z(), b.y() / b.z(), 1.0) : b);
  }
}

bool BearingTable::contains(PixelPoint p) const {
  const double gu = (p.u - origin_u_) / step_u_;
  const double gv = (p.v - origin_v_) / step_v_;
  return gu >= -kDomainSlack && gv >= -kDomainSlack &&
         gu <= static_cast<double>(cols_ - 1) + kDomainSlack &&
         gv <= static_cast<double>(rows_ - 1) + kDomainSlack;
}

Vec3 BearingTable::sample(double gu, double gv, Eigen::Matrix<double, 3, 2>* jac) const {
  const auto ci = static_cast<std::size_t>(
      std::clamp(std::floor(gu), 0.0, static_cast<double>(cols_ - 2)));
  const auto cj = static_cast<std::size_t>(
      std::clamp(std::floor(gv), 0.0, static_cast<double>(rows_ - 2)));
  const double a = gu - static_cast<double>(ci);
  const double b = gv - static_cast<double>(cj);
  const Vec3& n00 = nodes_[cj * cols_ + ci];
  const Vec3& n10 = nodes_[cj * cols_ + ci + 1];
  const Vec3& n01 = nodes_[(cj + 1) * cols_ + ci];
  const Vec3& n11 = nodes_[(cj + 1) * cols_ + ci + 1];
  if (jac != nullptr) {
    jac->col(0) = (1.0 - b) * (n10 - n00) + b * (n11 - n01);
    jac->col(1) = (1.0 - a) * (n01 - n00) + a * (n11 - n10);
  }
  return (1.0 - a) * (1.0 - b) * n00 + a * (1.0 - b) * n10 + (1.0 - a) * b * n01 + a * b * n11;
}

Bearing BearingTable::bearing(PixelPoint p) const {
  if (!contains(p)) {
    throw Error(ErrorCode::OutOfDomain, "pixel (" + std::to_string(p.u) + ", " +
                                            std::to_string(p.v) + ") outside bearing table");
  }
  return Bearing::from_direction(
      sample((p.u - origin_u_) / step_u_, (p.v - origin_v_) / step_v_, nullptr));
}

PixelPoint BearingTable::project(const Vec3& point) const {
  Vec3 target;
  if (planar_) {
    if (point.z() <= 0.0) throw Error(ErrorCode::BehindCamera, "point has non-positive depth");
    target = Vec3(point.x() / point.z(), point.y() / point.z(), 1.0);
  } else {
    const double n = point.norm();
    if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "cannot project the origin");
    target = point / n;
  }

  // Seed from the closest node, then Newton / Gauss-Newton on grid coordinates.
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const double d = (nodes_[k] - target).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = k;
    }
  }
  Vec2 g(static_cast<double>(best % cols_), static_cast<double>(best / cols_));
  const Vec2 upper(static_cast<double>(cols_ - 1), static_cast<double>(rows_ - 1));

  Vec3 residual = Vec3::Constant(std::numeric_limits<double>::infinity());
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::Matrix<double, 3, 2> jac;
    const Vec3 f = sample(g.x(), g.y(), &jac);
    Vec2 delta;
    if (planar_) {
      residual = f - target;
      delta = -jac.topRows<2>().partialPivLu().solve(residual.head<2>());
    } else {
      const double fn = f.norm();
      const Vec3 unit = f / fn;
      const Eigen::Matrix<double, 3, 2> j_unit = (Mat3::Identity() - unit * unit.transpose()) * jac / fn;
      residual = unit - target;
      delta = -(j_unit.transpose() * j_unit).ldlt().solve(j_unit.transpose() * residual);
    }
    if (!delta.allFinite()) break;
    g = (g + delta).cwiseMax(Vec2::Zero()).cwiseMin(upper);
    if (delta.norm() < 1e-13) break;
  }
  residual = (planar_ ? sample(g.x(), g.y(), nullptr) : sample(g.x(), g.y(), nullptr).normalized()) - target;
  if (residual.norm() > 1e-9) {
    throw Error(ErrorCode::OutOfDomain, "direction not covered by bearing table");
  }
  return {origin_u_ + g.x() * step_u_, origin_v_ + g.y() * step_v_};
}

CameraModel CameraModel::pinhole(const PinholeIntrinsics& k, ImageSize size) {
  k.validate();
  if (!(size.width > 0.0) || !(size.height > 0.0)) {
    throw Error(ErrorCode::CalibrationInvalid, "image size must be positive");
  }
  return CameraModel(Pinhole{k, size});
}

CameraModel CameraModel::generic(BearingTable table) { return CameraModel(std::move(table)); }

const PinholeIntrinsics& CameraModel::intrinsics() const {
  if (const auto* p = std::get_if<Pinhole>(&model_)) return p->intrinsics;
  throw Error(ErrorCode::UnsupportedModel, "camera is not a pinhole model");
}

ImageSize CameraModel::image_size() const {
  if (const auto* p = std::get_if<Pinhole>(&model_)) return p->size;
  const auto& t = std::get<BearingTable>(model_);
  return {t.origin_u() + static_cast<double>(t.cols() - 1) * t.step_u(),
          t.origin_v() + static_cast<double>(t.rows() - 1) * t.step_v()};
}

bool CameraModel::contains(PixelPoint p) const {
  if (const auto* c = std::get_if<Pinhole>(&model_)) {
    return p.u >= 0.0 && p.v >= 0.0 && p.u <= c->size.width && p.v <= c->size.height;
  }
  return std::get<BearingTable>(model_).contains(p);
}

Bearing bearing_from_pixel(const CameraModel& model, PixelPoint p) {
  if (const auto* c = std::get_if<CameraModel::Pinhole>(&model.model_)) {
    const auto& k = c->intrinsics;
    const double y = (p.v - k.cy) / k.fy;
    const double x = (p.u - k.cx - k.skew * y) / k.fx;
    return Bearing::from_direction(Vec3(x, y, 1.0));
  }
  return std::get<BearingTable>(model.model_).bearing(p);
}

PixelPoint project(const CameraModel& model, const Vec3& point) {
  if (const auto* c = std::get_if<CameraModel::Pinhole>(&model.model_)) {
    if (point.z() <= 0.0) throw Error(ErrorCode::BehindCamera, "point has non-positive depth");
    const auto& k = c->intrinsics;
    const double x = point.x() / point.z();
    const double y = point.y() / point.z();
    return {k.fx * x + k.skew * y + k.cx, k.fy * y + k.cy};
  }
  return std::get<BearingTable>(model.model_).project(point);
}

BearingTable tabulate(const CameraModel& model, std::size_t cols, std::size_t rows, double origin_u,
                      double origin_v, double step_u, double step_v) {
  std::vector<Vec3> bearings;
  bearings.reserve(cols * rows);
  for (std::size_t j = 0; j < rows; ++j) {
    for (std::size_t i = 0; i < cols; ++i) {
      const PixelPoint p{origin_u + static_cast<double>(i) * step_u,
                         origin_v + static_cast<double>(j) * step_v};
      bearings.push_back(bearing_from_pixel(model, p).direction());
    }
  }
  return BearingTable(cols, rows, origin_u, origin_v, step_u, step_v, std::move(bearings));
}

}  // namespace momo
