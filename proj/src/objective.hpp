#pragma once

// Residual assembly over a rig and its match sets, generic in the scalar type
// so the same code serves energy evaluation, central differences and
// forward-mode differentiation.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/AutoDiff>

#include "momo/detail/kernels.hpp"
#include "momo/manifold.hpp"

namespace momo::detail {

using Jet = Eigen::AutoDiffScalar<Eigen::Matrix<double, 4, 1>>;

template <typename T>
using Vec2T = Eigen::Matrix<T, 2, 1>;

class Objective {
 public:
  Objective(const CameraRig& rig, std::span<const MatchSet> sets, MetricKind metric, RobustLoss loss);

  std::size_t match_count() const { return points0_.size(); }
  MetricKind metric() const { return metric_; }
  const RobustLoss& loss() const { return loss_; }

  /// Fills one 2-vector residual block per match (AnglePlane uses only the
  /// first entry). `valid[i] == 0` marks skipped matches. Returns false when
  /// every camera that has matches sees a degenerate translation.
  template <typename T>
  bool residuals(const std::array<T, kParamCount>& x, std::vector<Vec2T<T>>& out,
                 std::vector<std::uint8_t>& valid) const;

  struct Energy {
    double value = 0.0;
    std::size_t used = 0;
    std::size_t skipped = 0;
  };

  /// Throws DegenerateTranslation (see residuals()).
  Energy energy(const std::array<double, kParamCount>& x) const;

 private:
  struct Block {
    const RigCamera* camera = nullptr;
    Mat3 k_inv = Mat3::Identity();
    std::size_t begin = 0;
    std::size_t end = 0;
  };

  std::vector<Block> blocks_;
  std::vector<Vec3> points0_;  // bearings (AnglePlane) or homogeneous pixels (GeoLine)
  std::vector<Vec3> points1_;
  MetricKind metric_;
  RobustLoss loss_;
};

template <typename T>
bool Objective::residuals(const std::array<T, kParamCount>& x, std::vector<Vec2T<T>>& out,
                          std::vector<std::uint8_t>& valid) const {
  out.assign(points0_.size(), Vec2T<T>(T(0.0), T(0.0)));
  valid.assign(points0_.size(), 0);

  Mat3T<T> motion_r;
  Vec3T<T> motion_t;
  vehicle_motion(x[0], x[1], x[2], x[3], motion_r, motion_t);

  bool any_camera = false;
  bool any_nondegenerate = false;
  for (const auto& block : blocks_) {
    if (block.begin == block.end) continue;
    any_camera = true;
    Mat3T<T> r;
    Vec3T<T> t;
    camera_point_transform(motion_r, motion_t, block.camera->extrinsic, r, t);
    if (!(value_of(t.norm()) >= kDegenerateTranslation)) continue;
    any_nondegenerate = true;
    const Mat3T<T> e = skew_t(t) * r;
    if (metric_ == MetricKind::AnglePlane) {
      for (std::size_t i = block.begin; i < block.end; ++i) {
        T res;
        if (angleplane_residual_t(e, points0_[i], points1_[i], res)) {
          out[i](0) = res;
          valid[i] = 1;
        }
      }
    } else {
      const Mat3T<T> k_inv = block.k_inv.template cast<T>();
      const Mat3T<T> f = k_inv.transpose() * e * k_inv;
      for (std::size_t i = block.begin; i < block.end; ++i) {
        T d1;
        T d0;
        if (geoline_residuals_t(f, points0_[i], points1_[i], d1, d0)) {
          out[i] << d1, d0;
          valid[i] = 1;
        }
      }
    }
  }
  return !any_camera || any_nondegenerate;
}

}  // namespace momo::detail
