#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "momo/error.hpp"

namespace momo {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rigid transform. A Pose named "B in A" maps point coordinates from
/// frame B into frame A: p_A = rotation * p_B + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  static Pose from_matrix(const Eigen::Matrix<double, 3, 4>& rt);

  Eigen::Matrix<double, 3, 4> matrix() const;
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  /// Orthonormality and det = +1 within `tol`.
  bool is_valid(double tol = 1e-9) const;
};

/// Result applies b first, then a.
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);
inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }

Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);

Mat3 skew(const Vec3& t);

/// Rotation angle of R in [0, pi].
double rotation_angle(const Mat3& r);

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;

  Vec3 homogeneous() const { return {u, v, 1.0}; }
};

/// Unit-norm line of sight.
class Bearing {
 public:
  Bearing() = default;
  /// Normalizes `direction`; throws InvalidArgument for a zero or non-finite vector.
  static Bearing from_direction(const Vec3& direction);

  const Vec3& direction() const { return dir_; }

 private:
  explicit Bearing(const Vec3& unit) : dir_(unit) {}
  Vec3 dir_ = Vec3::UnitZ();
};

struct PinholeIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double skew = 0.0;

  Mat3 matrix() const;
  /// Throws CalibrationInvalid unless fx, fy > 0 and all finite.
  void validate() const;
};

struct EssentialMatrix {
  Mat3 m;
};

struct FundamentalMatrix {
  Mat3 m;
};

/// `motion` is the point transform carrying tau0 camera coordinates into
/// the tau1 camera frame. E = [t]x R. Throws DegenerateTranslation for |t| < 1e-12.
EssentialMatrix essential_from_motion(const Pose& motion);

/// F = K1^-T E K0^-1.
FundamentalMatrix fundamental_from_essential(const EssentialMatrix& e, const PinholeIntrinsics& k0,
                                             const PinholeIntrinsics& k1);

inline constexpr double kDegenerateTranslation = 1e-12;

}  // namespace momo
