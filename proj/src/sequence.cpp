#include "momo/sequence.hpp"

#include <chrono>
#include <cmath>

namespace momo {

SequenceResult run_sequence(const CameraRig& rig, std::span<const FramePairRecord> records,
                            const ScaleSource& scale, const SequenceOptions& opts) {
  if (records.empty()) throw Error(ErrorCode::NoRecords, "no frame pairs to process");
  if (scale.mode == ScaleMode::Fixed && scale.per_frame.size() < records.size()) {
    throw Error(ErrorCode::InvalidArgument, "scale file has " + std::to_string(scale.per_frame.size()) +
                                                " entries for " + std::to_string(records.size()) + " frame pairs");
  }

  SequenceResult out;
  out.trajectory.poses.push_back(Pose::identity());
  std::optional<MotionParams> previous;
  double last_scale = scale.initial;

  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& record = records[k];
    FrameResult frame;
    frame.t0 = record.t0;
    frame.t1 = record.t1;
    const double source_scale = k < scale.per_frame.size() ? scale.per_frame[k] : last_scale;

    MotionParams prior = previous.value_or(MotionParams{});
    prior.free = {true, false, false, false};
    prior.arc_length = source_scale;
    const bool in_curve = previous && std::abs(previous->yaw) >= opts.curve_threshold;
    if (scale.mode == ScaleMode::FreeInCurves && in_curve) {
      prior.set_free(Param::ArcLength, true);
      if (scale.per_frame.empty()) prior.arc_length = previous->arc_length;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
      const auto sets = to_match_sets(record, rig);
      EstimatorOptions est_opts = opts.estimator;
      if (!previous) est_opts.fallback_grid = opts.cold_start;
      EstimateResult result = estimate(rig, sets, prior, est_opts);
      if (!previous && scale.mode == ScaleMode::FreeInCurves && std::abs(result.params.yaw) >= opts.curve_threshold) {
        MotionParams refined = result.params;
        refined.set_free(Param::ArcLength, true);
        result = estimate(rig, sets, refined, opts.estimator);
      }
      const bool left_curve = std::abs(result.params.yaw) < opts.curve_threshold;
      if (result.params.is_free(Param::ArcLength) &&
          (left_curve || result.condition_note == ConditionNote::ScaleUnobservable)) {
        // Fall back to the scale source when the motion does not pin the arc length.
        MotionParams fixed = result.params;
        fixed.arc_length = source_scale;
        fixed.set_free(Param::ArcLength, false);
        result = estimate(rig, sets, fixed, opts.estimator);
      }
      frame.scale_free = result.params.is_free(Param::ArcLength);
      frame.motion = result.params;
      frame.estimate = std::move(result);
    } catch (const Error& e) {
      frame.failed = true;
      frame.error = e.what();
      frame.motion = prior;
    }
    frame.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    out.trajectory.poses.push_back(out.trajectory.poses.back() * pose_from_params(frame.motion));
    previous = frame.motion;
    last_scale = frame.motion.arc_length;
    out.frames.push_back(std::move(frame));
  }
  return out;
}

}  // namespace momo
