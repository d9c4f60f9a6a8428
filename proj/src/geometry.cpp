#include "momo/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace momo {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateTranslation: return "DegenerateTranslation";
    case ErrorCode::EpipoleDegenerate: return "EpipoleDegenerate";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnsupportedModel: return "UnsupportedModel";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoMatches: return "NoMatches";
    case ErrorCode::NoVisiblePoints: return "NoVisiblePoints";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::CalibrationInvalid: return "CalibrationInvalid";
    case ErrorCode::NonMonotoneFrames: return "NonMonotoneFrames";
    case ErrorCode::NoRecords: return "NoRecords";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::TrajectoryTooShort: return "TrajectoryTooShort";
  }
  return "Unknown";
}

Pose Pose::from_matrix(const Eigen::Matrix<double, 3, 4>& rt) {
  Pose p;
  p.rotation = rt.leftCols<3>();
  p.translation = rt.col(3);
  return p;
}

Eigen::Matrix<double, 3, 4> Pose::matrix() const {
  Eigen::Matrix<double, 3, 4> m;
  m.leftCols<3>() = rotation;
  m.col(3) = translation;
  return m;
}

bool Pose::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho < tol && std::abs(rotation.determinant() - 1.0) < tol;
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

Pose inverse(const Pose& p) {
  Pose out;
  out.rotation = p.rotation.transpose();
  out.translation = -(out.rotation * p.translation);
  return out;
}

Mat3 rot_x(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitX()).toRotationMatrix();
}

Mat3 rot_y(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitY()).toRotationMatrix();
}

Mat3 rot_z(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
}

Mat3 skew(const Vec3& t) {
  Mat3 s;
  s << 0.0, -t.z(), t.y(),
       t.z(), 0.0, -t.x(),
       -t.y(), t.x(), 0.0;
  return s;
}

double rotation_angle(const Mat3& r) {
  const double c = 0.5 * (r.trace() - 1.0);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

Bearing Bearing::from_direction(const Vec3& direction) {
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::InvalidArgument, "bearing direction must be finite and nonzero");
  }
  return Bearing(direction / n);
}

Mat3 PinholeIntrinsics::matrix() const {
  Mat3 k;
  k << fx, skew, cx,
       0.0, fy, cy,
       0.0, 0.0, 1.0;
  return k;
}

void PinholeIntrinsics::validate() const {
  const bool finite = std::isfinite(fx) && std::isfinite(fy) && std::isfinite(cx) &&
                      std::isfinite(cy) && std::isfinite(skew);
  if (!finite || !(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::CalibrationInvalid, "pinhole intrinsics require finite values and fx, fy > 0");
  }
}

EssentialMatrix essential_from_motion(const Pose& motion) {
  if (motion.translation.norm() < kDegenerateTranslation) {
    throw Error(ErrorCode::DegenerateTranslation, "epipolar geometry undefined for pure rotation");
  }
  return {skew(motion.translation) * motion.rotation};
}

FundamentalMatrix fundamental_from_essential(const EssentialMatrix& e, const PinholeIntrinsics& k0,
                                             const PinholeIntrinsics& k1) {
  const Mat3 k0_inv = k0.matrix().inverse();
  const Mat3 k1_inv = k1.matrix().inverse();
  return {k1_inv.transpose() * e.m * k0_inv};
}

}  // namespace momo
