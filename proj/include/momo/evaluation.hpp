#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "momo/io.hpp"

namespace momo {

/// Relative-pose error of one segment, KITTI devkit style.
struct SegmentError {
  std::size_t first_frame = 0;
  std::size_t last_frame = 0;
  double length = 0.0;             // nominal segment length, m
  double rotation_error = 0.0;     // rad per m
  double translation_error = 0.0;  // m per m
  std::optional<double> speed;     // m/s, when timestamps exist
};

struct ErrorBucket {
  double key = 0.0;  // segment length (m) or lower speed edge (m/s)
  double rotation_deg_per_m = 0.0;
  double translation_percent = 0.0;
  std::size_t count = 0;
};

struct RuntimeStats {
  std::size_t count = 0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double max_ms = 0.0;
};

struct EvalReport {
  std::vector<SegmentError> segments;
  std::vector<ErrorBucket> by_length;  // one per requested length that has segments
  std::vector<ErrorBucket> by_speed;   // empty without timestamps
  double rotation_deg_per_m = 0.0;     // mean over all segments
  double translation_percent = 0.0;
  std::optional<RuntimeStats> runtime;
};

struct EvalOptions {
  std::vector<double> lengths = {100, 200, 300, 400, 500, 600, 700, 800};
  std::size_t step = 10;            // frames between segment starts
  double speed_bucket_width = 2.0;  // m/s
};

/// Segment-based relative pose error of `est` against `gt`. A segment runs from
/// each start frame to the first frame whose ground-truth path length reaches
/// the segment length. Throws InvalidArgument on frame-count mismatch and
/// TrajectoryTooShort when no segment fits.
EvalReport evaluate(const Trajectory& est, const Trajectory& gt, const EvalOptions& opts = {},
                    std::span<const double> runtimes_ms = {});

RuntimeStats runtime_stats(std::span<const double> runtimes_ms);

}  // namespace momo
