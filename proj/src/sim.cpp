#include "momo/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "momo/random.hpp"

namespace momo {

void SceneSpec::validate() const {
  if (num_points < 1) throw Error(ErrorCode::InvalidArgument, "scene needs at least one point");
  if (!(depth_min > 0.0) || !(depth_max >= depth_min)) {
    throw Error(ErrorCode::InvalidArgument, "scene depth range must satisfy 0 < min <= max");
  }
  if (!(lateral_spread >= 0.0) || !(vertical_spread >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "scene spreads must be non-negative");
  }
}

std::vector<Vec3> generate_scene(const SceneSpec& spec) {
  spec.validate();
  Xoshiro256 rng(spec.seed);
  std::vector<Vec3> points;
  points.reserve(spec.num_points);
  for (std::size_t i = 0; i < spec.num_points; ++i) {
    const double depth = rng.uniform(spec.depth_min, spec.depth_max);
    if (spec.layout == SceneLayout::Forward) {
      const double y = rng.uniform(-spec.lateral_spread, spec.lateral_spread);
      const double z = rng.uniform(-spec.vertical_spread, spec.vertical_spread);
      points.emplace_back(depth, y, z);
    } else {
      const double azimuth = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double z = rng.uniform(-spec.vertical_spread, spec.vertical_spread);
      points.emplace_back(depth * std::cos(azimuth), depth * std::sin(azimuth), z);
    }
  }
  return points;
}

void NoiseSpec::validate() const {
  if (!(pixel_sigma >= 0.0) || !std::isfinite(pixel_sigma)) {
    throw Error(ErrorCode::InvalidArgument, "pixel_sigma must be non-negative");
  }
  if (!(outlier_fraction >= 0.0 && outlier_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "outlier_fraction must lie in [0, 1]");
  }
}

std::size_t SimulatedMatches::size() const {
  std::size_t n = 0;
  for (const auto& s : sets) n += s.matches.size();
  return n;
}

std::vector<bool> SimulatedMatches::flat_labels() const {
  std::vector<bool> out;
  for (const auto& l : inlier) out.insert(out.end(), l.begin(), l.end());
  return out;
}

namespace {

std::optional<PixelPoint> visible_pixel(const CameraModel& model, const Vec3& p_cam) {
  try {
    const PixelPoint px = project(model, p_cam);
    if (!model.contains(px)) return std::nullopt;
    return px;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BehindCamera || e.code() == ErrorCode::OutOfDomain ||
        e.code() == ErrorCode::InvalidArgument) {
      return std::nullopt;
    }
    throw;
  }
}

PixelPoint uniform_pixel(const CameraModel& model, Xoshiro256& rng) {
  if (const auto* table = model.table()) {
    const double u_max = table->origin_u() + static_cast<double>(table->cols() - 1) * table->step_u();
    const double v_max = table->origin_v() + static_cast<double>(table->rows() - 1) * table->step_v();
    return {rng.uniform(table->origin_u(), u_max), rng.uniform(table->origin_v(), v_max)};
  }
  const ImageSize size = model.image_size();
  return {rng.uniform(0.0, size.width), rng.uniform(0.0, size.height)};
}

}  // namespace

SimulatedMatches generate_matches(std::span<const Vec3> points, const CameraRig& rig, const MotionParams& truth,
                                  const NoiseSpec& noise) {
  truth.validate();
  noise.validate();
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "no scene points");

  Xoshiro256 rng(noise.seed);
  const Pose motion_inv = inverse(pose_from_params(truth));
  SimulatedMatches out;

  for (const auto& cam : rig.cameras()) {
    const Pose ext_inv = inverse(cam.extrinsic);
    MatchSet set;
    set.camera_id = cam.id;
    for (const auto& p_v0 : points) {
      const Vec3 p_c0 = ext_inv.apply(p_v0);
      const Vec3 p_c1 = ext_inv.apply(motion_inv.apply(p_v0));
      const auto px0 = visible_pixel(cam.model, p_c0);
      const auto px1 = visible_pixel(cam.model, p_c1);
      if (!px0 || !px1) continue;
      PixelPoint n0 = *px0;
      PixelPoint n1 = *px1;
      if (noise.pixel_sigma > 0.0) {
        n0.u += noise.pixel_sigma * rng.normal();
        n0.v += noise.pixel_sigma * rng.normal();
        n1.u += noise.pixel_sigma * rng.normal();
        n1.v += noise.pixel_sigma * rng.normal();
        if (!cam.model.is_pinhole() && (!cam.model.contains(n0) || !cam.model.contains(n1))) continue;
      }
      set.matches.push_back(FeatureMatch::from_pixels(cam.model, n0, n1));
    }

    const std::size_t n = set.matches.size();
    std::vector<bool> labels(n, true);
    const auto k = static_cast<std::size_t>(std::llround(noise.outlier_fraction * static_cast<double>(n)));
    if (k > 0) {
      // Partial Fisher-Yates picks k distinct indices.
      std::vector<std::size_t> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(order[i], order[j]);
      }
      std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(chosen.begin(), chosen.end());
      for (std::size_t idx : chosen) labels[idx] = false;

      if (noise.outlier_mode == OutlierMode::WrongAssociation && k >= 2) {
        std::vector<FeatureMatch> original;
        original.reserve(k);
        for (std::size_t idx : chosen) original.push_back(set.matches[idx]);
        for (std::size_t c = 0; c < k; ++c) {
          auto& m = set.matches[chosen[c]];
          const auto& donor = original[(c + 1) % k];
          m.pixel_t1 = donor.pixel_t1;
          m.bearing_t1 = donor.bearing_t1;
        }
      } else {
        for (std::size_t idx : chosen) {
          auto& m = set.matches[idx];
          m = FeatureMatch::from_pixels(cam.model, m.pixel_t0, uniform_pixel(cam.model, rng));
        }
      }
    }
    out.sets.push_back(std::move(set));
    out.inlier.push_back(std::move(labels));
  }
  if (out.size() == 0) throw Error(ErrorCode::NoVisiblePoints, "no point is visible in any camera at both times");
  return out;
}

MotionParams grid_search_oracle(const CameraRig& rig, std::span<const MatchSet> sets, const GridSpec& bounds,
                                const MotionParams& tmpl, const RobustLoss& loss, MetricKind metric) {
  std::vector<Param> params;
  std::vector<GridAxis> axes;
  for (std::size_t k = 0; k < kParamCount; ++k) {
    if (!tmpl.free[k] || !bounds.axes[k]) continue;
    if (bounds.axes[k]->steps < 2 || !(bounds.axes[k]->max >= bounds.axes[k]->min)) {
      throw Error(ErrorCode::InvalidArgument, "grid bounds need min <= max and >= 2 steps");
    }
    params.push_back(static_cast<Param>(k));
    axes.push_back(*bounds.axes[k]);
  }

  std::vector<std::size_t> counter(axes.size(), 0);
  std::optional<MotionParams> best;
  double best_energy = std::numeric_limits<double>::infinity();
  while (true) {
    MotionParams p = tmpl;
    for (std::size_t d = 0; d < axes.size(); ++d) p.set(params[d], axes[d].at(counter[d]));
    double e = std::numeric_limits<double>::infinity();
    if (std::abs(p.yaw) < std::numbers::pi) {
      try {
        e = multi_camera_energy(p, rig, sets, loss, metric).energy;
      } catch (const Error& err) {
        if (err.code() != ErrorCode::DegenerateTranslation) throw;
      }
    }
    if (std::isfinite(e) && (!best || grid_candidate_better(e, p, best_energy, *best))) {
      best = p;
      best_energy = e;
    }
    std::size_t d = 0;
    for (; d < axes.size(); ++d) {
      if (++counter[d] < axes[d].steps) break;
      counter[d] = 0;
    }
    if (d == axes.size()) break;
  }
  if (!best) throw Error(ErrorCode::DegenerateTranslation, "every grid point is degenerate");
  return *best;
}

std::vector<MotionParams> sequence_truth(const Scenario& scenario) {
  std::vector<MotionParams> out;
  if (scenario.sequence.empty()) {
    out.push_back(scenario.truth);
    return out;
  }
  for (const auto& seg : scenario.sequence) {
    for (std::size_t i = 0; i < seg.frames; ++i) {
      MotionParams p;
      p.yaw = seg.total_yaw / static_cast<double>(seg.frames);
      p.arc_length = scenario.speed;
      out.push_back(p);
    }
  }
  return out;
}

std::vector<SimulatedFrame> simulate_sequence(const Scenario& scenario) {
  Xoshiro256 seeds(scenario.seed);
  std::vector<SimulatedFrame> frames;
  for (const auto& truth : sequence_truth(scenario)) {
    SceneSpec scene = scenario.scene;
    NoiseSpec noise = scenario.noise;
    scene.seed = seeds();
    noise.seed = seeds();
    const auto points = generate_scene(scene);
    frames.push_back({truth, generate_matches(points, scenario.rig, truth, noise)});
  }
  return frames;
}

}  // namespace momo
