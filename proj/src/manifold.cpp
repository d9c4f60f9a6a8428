#include "momo/manifold.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "objective.hpp"

namespace momo {

double MotionParams::get(Param p) const {
  switch (p) {
    case Param::Yaw: return yaw;
    case Param::ArcLength: return arc_length;
    case Param::Pitch: return pitch;
    case Param::Roll: return roll;
  }
  return 0.0;
}

void MotionParams::set(Param p, double value) {
  switch (p) {
    case Param::Yaw: yaw = value; break;
    case Param::ArcLength: arc_length = value; break;
    case Param::Pitch: pitch = value; break;
    case Param::Roll: roll = value; break;
  }
}

std::size_t MotionParams::free_count() const {
  std::size_t n = 0;
  for (bool f : free) n += f ? 1 : 0;
  return n;
}

void MotionParams::validate() const {
  for (double v : values()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "motion parameters must be finite");
  }
  if (!(std::abs(yaw) < std::numbers::pi)) {
    throw Error(ErrorCode::InvalidArgument, "yaw step must stay below a half turn");
  }
}

Pose pose_from_params(const MotionParams& p) {
  Pose out;
  detail::vehicle_motion(p.yaw, p.arc_length, p.pitch, p.roll, out.rotation, out.translation);
  return out;
}

Pose conjugate_to_camera(const Pose& motion, const Pose& extrinsic) {
  return inverse(extrinsic) * motion * extrinsic;
}

Pose camera_point_motion(const Pose& vehicle_motion, const Pose& extrinsic) {
  return inverse(conjugate_to_camera(vehicle_motion, extrinsic));
}

Eigen::VectorXd pack_free(const MotionParams& p) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(p.free_count()));
  Eigen::Index k = 0;
  const auto values = p.values();
  for (std::size_t i = 0; i < kParamCount; ++i) {
    if (p.free[i]) v(k++) = values[i];
  }
  return v;
}

MotionParams unpack_free(const Eigen::VectorXd& v, const MotionParams& tmpl) {
  if (static_cast<std::size_t>(v.size()) != tmpl.free_count()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(tmpl.free_count()) +
                                                  " free parameters, got " + std::to_string(v.size()));
  }
  MotionParams out = tmpl;
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < kParamCount; ++i) {
    if (tmpl.free[i]) out.set(static_cast<Param>(i), v(k++));
  }
  return out;
}

CameraRig::CameraRig(std::vector<RigCamera> cameras) : cameras_(std::move(cameras)) {
  if (cameras_.empty()) throw Error(ErrorCode::CalibrationInvalid, "rig needs at least one camera");
  std::set<int> ids;
  for (const auto& c : cameras_) {
    if (!ids.insert(c.id).second) {
      throw Error(ErrorCode::CalibrationInvalid, "duplicate camera id " + std::to_string(c.id));
    }
    if (!c.extrinsic.is_valid(1e-9)) {
      throw Error(ErrorCode::CalibrationInvalid,
                  "extrinsic of camera " + std::to_string(c.id) + " is not a rigid transform");
    }
  }
}

const RigCamera* CameraRig::find(int id) const {
  for (const auto& c : cameras_) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

const RigCamera& CameraRig::camera(int id) const {
  if (const auto* c = find(id)) return *c;
  throw Error(ErrorCode::InvalidArgument, "unknown camera id " + std::to_string(id));
}

namespace detail {

Objective::Objective(const CameraRig& rig, std::span<const MatchSet> sets, MetricKind metric, RobustLoss loss)
    : metric_(metric), loss_(loss) {
  loss_.validate();
  std::size_t total = 0;
  for (const auto& s : sets) total += s.matches.size();
  points0_.reserve(total);
  points1_.reserve(total);
  for (const auto& s : sets) {
    Block block;
    block.camera = &rig.camera(s.camera_id);
    if (metric_ == MetricKind::GeoLine) {
      if (!block.camera->model.is_pinhole()) {
        throw Error(ErrorCode::UnsupportedModel,
                    "GeoLine requires pinhole cameras (camera " + std::to_string(s.camera_id) + ")");
      }
      block.k_inv = block.camera->model.intrinsics().matrix().inverse();
    }
    block.begin = points0_.size();
    for (const auto& m : s.matches) {
      if (metric_ == MetricKind::GeoLine) {
        points0_.push_back(m.pixel_t0.homogeneous());
        points1_.push_back(m.pixel_t1.homogeneous());
      } else {
        points0_.push_back(m.bearing_t0.direction());
        points1_.push_back(m.bearing_t1.direction());
      }
    }
    block.end = points0_.size();
    blocks_.push_back(block);
  }
}

Objective::Energy Objective::energy(const std::array<double, kParamCount>& x) const {
  std::vector<Vec2T<double>> res;
  std::vector<std::uint8_t> valid;
  if (!residuals(x, res, valid)) {
    throw Error(ErrorCode::DegenerateTranslation, "no camera observes a nonzero translation");
  }
  CompensatedSum sum;
  Energy out;
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (!valid[i]) {
      ++out.skipped;
      continue;
    }
    sum.add(robust_loss_eval(loss_, res[i].squaredNorm()).value);
    ++out.used;
  }
  out.value = sum.value();
  return out;
}

}  // namespace detail

EnergyValue multi_camera_energy(const MotionParams& p, const CameraRig& rig, std::span<const MatchSet> sets,
                                const RobustLoss& loss, MetricKind metric) {
  const detail::Objective objective(rig, sets, metric, loss);
  const auto e = objective.energy(p.values());
  return {e.value, e.used, e.skipped};
}

}  // namespace momo
