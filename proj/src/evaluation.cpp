#include "momo/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace momo {

namespace {

std::vector<double> path_distances(const std::vector<Pose>& poses) {
  std::vector<double> dist(poses.size(), 0.0);
  for (std::size_t i = 1; i < poses.size(); ++i) {
    dist[i] = dist[i - 1] + (poses[i].translation - poses[i - 1].translation).norm();
  }
  return dist;
}

std::optional<std::size_t> last_frame_for(const std::vector<double>& dist, std::size_t first, double length) {
  const double target = dist[first] + length - 1e-9 * length;
  for (std::size_t i = first; i < dist.size(); ++i) {
    if (dist[i] >= target) return i;
  }
  return std::nullopt;
}

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

RuntimeStats runtime_stats(std::span<const double> runtimes_ms) {
  RuntimeStats s;
  s.count = runtimes_ms.size();
  if (s.count == 0) return s;
  std::vector<double> sorted(runtimes_ms.begin(), runtimes_ms.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean_ms = sum / static_cast<double>(s.count);
  s.median_ms = s.count % 2 == 1 ? sorted[s.count / 2] : 0.5 * (sorted[s.count / 2 - 1] + sorted[s.count / 2]);
  s.max_ms = sorted.back();
  return s;
}

EvalReport evaluate(const Trajectory& est, const Trajectory& gt, const EvalOptions& opts,
                    std::span<const double> runtimes_ms) {
  if (est.poses.size() != gt.poses.size()) {
    throw Error(ErrorCode::InvalidArgument, "trajectories differ in frame count (" +
                                                std::to_string(est.poses.size()) + " vs " +
                                                std::to_string(gt.poses.size()) + ")");
  }
  if (opts.step == 0) throw Error(ErrorCode::InvalidArgument, "segment step must be positive");
  const std::vector<double>* times = nullptr;
  if (!gt.timestamps.empty()) {
    times = &gt.timestamps;
  } else if (!est.timestamps.empty()) {
    times = &est.timestamps;
  }
  if (times != nullptr && times->size() != gt.poses.size()) {
    throw Error(ErrorCode::InvalidArgument, "timestamp count does not match the pose count");
  }

  EvalReport report;
  const auto dist = path_distances(gt.poses);
  for (std::size_t first = 0; first < gt.poses.size(); first += opts.step) {
    for (double len : opts.lengths) {
      const auto last = last_frame_for(dist, first, len);
      if (!last) continue;
      const Pose delta_gt = inverse(gt.poses[first]) * gt.poses[*last];
      const Pose delta_est = inverse(est.poses[first]) * est.poses[*last];
      const Pose error = inverse(delta_est) * delta_gt;
      SegmentError seg;
      seg.first_frame = first;
      seg.last_frame = *last;
      seg.length = len;
      seg.rotation_error = rotation_angle(error.rotation) / len;
      seg.translation_error = error.translation.norm() / len;
      if (times != nullptr) {
        const double dt = (*times)[*last] - (*times)[first];
        if (dt > 0.0) seg.speed = len / dt;
      }
      report.segments.push_back(seg);
    }
  }
  if (report.segments.empty()) {
    throw Error(ErrorCode::TrajectoryTooShort, "no segment of the requested lengths fits the trajectory");
  }

  std::map<double, ErrorBucket> by_length;
  std::map<long long, ErrorBucket> by_speed;
  for (const auto& s : report.segments) {
    auto& lb = by_length[s.length];
    lb.key = s.length;
    lb.rotation_deg_per_m += s.rotation_error * kRadToDeg;
    lb.translation_percent += s.translation_error * 100.0;
    ++lb.count;
    if (s.speed) {
      const auto bin = static_cast<long long>(std::floor(*s.speed / opts.speed_bucket_width));
      auto& sb = by_speed[bin];
      sb.key = static_cast<double>(bin) * opts.speed_bucket_width;
      sb.rotation_deg_per_m += s.rotation_error * kRadToDeg;
      sb.translation_percent += s.translation_error * 100.0;
      ++sb.count;
    }
    report.rotation_deg_per_m += s.rotation_error * kRadToDeg;
    report.translation_percent += s.translation_error * 100.0;
  }
  const auto n = static_cast<double>(report.segments.size());
  report.rotation_deg_per_m /= n;
  report.translation_percent /= n;
  for (auto& [key, b] : by_length) {
    b.rotation_deg_per_m /= static_cast<double>(b.count);
    b.translation_percent /= static_cast<double>(b.count);
    report.by_length.push_back(b);
  }
  for (auto& [key, b] : by_speed) {
    b.rotation_deg_per_m /= static_cast<double>(b.count);
    b.translation_percent /= static_cast<double>(b.count);
    report.by_speed.push_back(b);
  }
  if (!runtimes_ms.empty()) report.runtime = runtime_stats(runtimes_ms);
  return report;
}

}  // namespace momo
