#pragma once

// Scalar-generic residual kernels shared by the double-precision API and the
// forward-mode (Eigen::AutoDiffScalar) Jacobian path.

#include <cmath>

#include <Eigen/Core>

#include "momo/geometry.hpp"

namespace momo::detail {

template <typename T>
using Mat3T = Eigen::Matrix<T, 3, 3>;
template <typename T>
using Vec3T = Eigen::Matrix<T, 3, 1>;

inline double value_of(double x) { return x; }
template <typename T>
double value_of(const T& x) {
  return x.value();
}

template <typename T>
Mat3T<T> skew_t(const Vec3T<T>& t) {
  Mat3T<T> s;
  s << T(0.0), -t(2), t(1),
       t(2), T(0.0), -t(0),
       -t(1), t(0), T(0.0);
  return s;
}

template <typename T>
Mat3T<T> rot_z_t(const T& a) {
  using std::cos;
  using std::sin;
  const T c = cos(a);
  const T s = sin(a);
  Mat3T<T> r;
  r << c, -s, T(0.0),
       s, c, T(0.0),
       T(0.0), T(0.0), T(1.0);
  return r;
}

template <typename T>
Mat3T<T> rot_y_t(const T& a) {
  using std::cos;
  using std::sin;
  const T c = cos(a);
  const T s = sin(a);
  Mat3T<T> r;
  r << c, T(0.0), s,
       T(0.0), T(1.0), T(0.0),
       -s, T(0.0), c;
  return r;
}

template <typename T>
Mat3T<T> rot_x_t(const T& a) {
  using std::cos;
  using std::sin;
  const T c = cos(a);
  const T s = sin(a);
  Mat3T<T> r;
  r << T(1.0), T(0.0), T(0.0),
       T(0.0), c, -s,
       T(0.0), s, c;
  return r;
}

inline constexpr double kSeriesSwitch = 1e-6;
inline constexpr double kEpipoleDegenerateTol = 1e-12;

/// Single-track arc: pose of the tau1 motion center in the tau0 motion center frame.
/// Translation (l sinc(g), l (1 - cos g)/g, 0); rotation Rz(g) Ry(pitch) Rx(roll).
template <typename T>
void vehicle_motion(const T& yaw, const T& arc, const T& pitch, const T& roll, Mat3T<T>& rotation,
                    Vec3T<T>& translation) {
  using std::cos;
  using std::sin;
  T sinc;
  T cosc;  // (1 - cos g) / g
  if (std::abs(value_of(yaw)) < kSeriesSwitch) {
    const T y2 = yaw * yaw;
    sinc = T(1.0) - y2 / 6.0 + y2 * y2 / 120.0;
    cosc = yaw * (T(0.5) - y2 / 24.0 + y2 * y2 / 720.0);
  } else {
    sinc = sin(yaw) / yaw;
    const T half = sin(yaw / 2.0);
    cosc = 2.0 * half * half / yaw;
  }
  translation << arc * sinc, arc * cosc, T(0.0);
  rotation = rot_z_t(yaw) * rot_y_t(pitch) * rot_x_t(roll);
}

/// Point transform from the tau0 camera frame into the tau1 camera frame for a
/// camera with extrinsic (camera in vehicle frame) `ext`, given the vehicle
/// motion (tau1 vehicle in tau0 vehicle). Equals inverse(ext^-1 * motion * ext).
template <typename T>
void camera_point_transform(const Mat3T<T>& motion_r, const Vec3T<T>& motion_t, const Pose& ext,
                            Mat3T<T>& r, Vec3T<T>& t) {
  const Mat3T<T> ext_r = ext.rotation.template cast<T>();
  const Vec3T<T> ext_t = ext.translation.template cast<T>();
  const Mat3T<T> ext_rt = ext_r.transpose();
  const Mat3T<T> motion_rt = motion_r.transpose();
  // ext^-1 * motion^-1 * ext
  r = ext_rt * motion_rt * ext_r;
  t = ext_rt * (motion_rt * (ext_t - motion_t) - ext_t);
}

/// Returns false (leaving `out` untouched) when b0 sits on the epipole.
template <typename T>
bool angleplane_residual_t(const Mat3T<T>& e, const Vec3& b0, const Vec3& b1, T& out) {
  const Vec3T<T> normal = e * b0.cast<T>();
  const T n = normal.norm();
  if (!(value_of(n) >= kEpipoleDegenerateTol)) return false;
  out = b1.cast<T>().dot(normal) / n;
  return true;
}

/// d(x1, F x0) and d(x0, F^T x1); false when either point maps to an epipole.
template <typename T>
bool geoline_residuals_t(const Mat3T<T>& f, const Vec3& x0, const Vec3& x1, T& d1, T& d0) {
  using std::sqrt;
  const Vec3T<T> line1 = f * x0.cast<T>();
  const Vec3T<T> line0 = f.transpose() * x1.cast<T>();
  const T n1 = sqrt(line1(0) * line1(0) + line1(1) * line1(1));
  const T n0 = sqrt(line0(0) * line0(0) + line0(1) * line0(1));
  if (!(value_of(n1) >= kEpipoleDegenerateTol) || !(value_of(n0) >= kEpipoleDegenerateTol)) return false;
  const T num = x1.cast<T>().dot(line1);
  d1 = num / n1;
  d0 = num / n0;
  return true;
}

}  // namespace momo::detail
