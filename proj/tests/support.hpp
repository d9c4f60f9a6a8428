#pragma once

#include <cmath>
#include <vector>

#include "momo/camera.hpp"
#include "momo/geometry.hpp"
#include "momo/manifold.hpp"
#include "momo/sim.hpp"

namespace momo::test {

inline PinholeIntrinsics hd_intrinsics() { return {700.0, 700.0, 640.0, 360.0, 0.0}; }
inline ImageSize hd_size() { return {1280.0, 720.0}; }
inline CameraModel hd_pinhole() { return CameraModel::pinhole(hd_intrinsics(), hd_size()); }

/// Forward-looking camera (optical axis along vehicle x) mounted at `position`.
inline Pose forward_mount(const Vec3& position = Vec3::Zero(), double heading = 0.0) {
  Mat3 r;
  r << 0, 0, 1,
      -1, 0, 0,
      0, -1, 0;
  return {rot_z(heading) * r, position};
}

inline CameraRig single_camera_rig() { return CameraRig({{0, hd_pinhole(), forward_mount()}}); }

/// Two forward cameras at lateral offsets +-offset, `ahead` metres in front of
/// the motion center. Cameras on the axle line (ahead = 0) translate parallel
/// to the motion center in every turn, so the arc length needs ahead != 0.
inline CameraRig lateral_pair_rig(double offset = 1.0, double ahead = 1.5) {
  return CameraRig({{0, hd_pinhole(), forward_mount({ahead, offset, 0.0})},
                    {1, hd_pinhole(), forward_mount({ahead, -offset, 0.0})}});
}

inline MotionParams motion(double yaw, double arc, bool arc_free = false) {
  MotionParams p;
  p.yaw = yaw;
  p.arc_length = arc;
  p.set_free(Param::ArcLength, arc_free);
  return p;
}

inline SceneSpec scene(std::size_t n, std::uint64_t seed) {
  SceneSpec s;
  s.num_points = n;
  s.depth_min = 12.0;
  s.depth_max = 60.0;
  s.seed = seed;
  return s;
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
  return a.cwiseAbs().maxCoeff();
}

}  // namespace momo::test
