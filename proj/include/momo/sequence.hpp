#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "momo/estimator.hpp"
#include "momo/io.hpp"

namespace momo {

enum class ScaleMode {
  Fixed,         // arc length per frame pair from `per_frame`
  FreeInCurves,  // estimated while turning, held (or taken from `per_frame`) otherwise
};

struct ScaleSource {
  ScaleMode mode = ScaleMode::Fixed;
  /// Odometer: one arc length per frame pair. Required for Fixed, optional for FreeInCurves.
  std::vector<double> per_frame;
  /// FreeInCurves without odometer: arc length assumed until the first curve.
  double initial = 1.0;
};

struct SequenceOptions {
  EstimatorOptions estimator;
  /// |yaw| of the prior that frees the arc length, rad. A free estimate whose
  /// own |yaw| lands below it is redone with the scale source.
  double curve_threshold = 0.01;
  GridSpec cold_start = GridSpec::yaw_default();
};

struct FrameResult {
  long long t0 = 0;
  long long t1 = 0;
  std::optional<EstimateResult> estimate;  // empty when the frame failed
  MotionParams motion;                     // what the trajectory chained
  bool failed = false;
  bool scale_free = false;
  std::string error;
  double runtime_ms = 0.0;
};

struct SequenceResult {
  Trajectory trajectory;
  std::vector<FrameResult> frames;
};

/// Estimates every frame pair with the previous estimate as prior (the first
/// pair starts from a yaw grid) and chains the motions into an absolute
/// trajectory starting at identity. Failed frames repeat the prior motion and
/// are flagged. Throws NoRecords on empty input and InvalidArgument when a
/// fixed scale source is shorter than the record list.
SequenceResult run_sequence(const CameraRig& rig, std::span<const FramePairRecord> records,
                            const ScaleSource& scale, const SequenceOptions& opts);

}  // namespace momo
