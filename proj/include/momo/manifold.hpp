#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "momo/camera.hpp"
#include "momo/epipolar.hpp"
#include "momo/geometry.hpp"

namespace momo {

/// Manifold coordinates in declaration order; pack/unpack and the free mask follow it.
enum class Param : std::size_t { Yaw = 0, ArcLength = 1, Pitch = 2, Roll = 3 };
inline constexpr std::size_t kParamCount = 4;

/// Single-track motion step: yaw change, travelled arc length, and optional
/// pitch/roll. `free` flags which coordinates the estimator may move.
struct MotionParams {
  double yaw = 0.0;         // rad
  double arc_length = 0.0;  // m
  double pitch = 0.0;       // rad
  double roll = 0.0;        // rad
  std::array<bool, kParamCount> free = {true, false, false, false};

  double get(Param p) const;
  void set(Param p, double value);
  bool is_free(Param p) const { return free[static_cast<std::size_t>(p)]; }
  void set_free(Param p, bool f) { free[static_cast<std::size_t>(p)] = f; }
  std::size_t free_count() const;
  std::array<double, kParamCount> values() const { return {yaw, arc_length, pitch, roll}; }

  /// Throws InvalidArgument unless all values are finite and |yaw| < pi.
  void validate() const;

  friend bool operator==(const MotionParams&, const MotionParams&) = default;
};

/// Pose of the tau1 motion center expressed in the tau0 motion center frame.
/// The straight-line limit is taken by series expansion for |yaw| < 1e-6.
Pose pose_from_params(const MotionParams& p);

/// inverse(extrinsic) * motion * extrinsic: the motion seen from a camera
/// mounted at `extrinsic` (camera pose in the vehicle frame).
Pose conjugate_to_camera(const Pose& motion, const Pose& extrinsic);

/// Point transform tau0 camera -> tau1 camera, the input of essential_from_motion.
Pose camera_point_motion(const Pose& vehicle_motion, const Pose& extrinsic);

Eigen::VectorXd pack_free(const MotionParams& p);
/// Throws DimensionMismatch if `v` does not have one entry per free field.
MotionParams unpack_free(const Eigen::VectorXd& v, const MotionParams& tmpl);

struct RigCamera {
  int id = 0;
  CameraModel model;
  Pose extrinsic;  // camera pose in the vehicle (motion center) frame
};

class CameraRig {
 public:
  /// Throws CalibrationInvalid on empty rigs, duplicate ids or invalid extrinsics.
  explicit CameraRig(std::vector<RigCamera> cameras);

  const std::vector<RigCamera>& cameras() const { return cameras_; }
  const RigCamera* find(int id) const;
  /// Throws InvalidArgument for unknown ids.
  const RigCamera& camera(int id) const;

 private:
  std::vector<RigCamera> cameras_;
};

/// Sum over match sets of the per-camera epipolar energy under the conjugated
/// motion. Throws DegenerateTranslation when every camera that has matches sees
/// a translation below 1e-12, and UnsupportedModel for GeoLine on a non-pinhole camera.
EnergyValue multi_camera_energy(const MotionParams& p, const CameraRig& rig, std::span<const MatchSet> sets,
                                const RobustLoss& loss, MetricKind metric);

}  // namespace momo
