#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "momo/estimator.hpp"
#include "momo/manifold.hpp"

namespace momo {

enum class SceneLayout {
  Forward,   // x in depth range, |y| <= lateral_spread, |z| <= vertical_spread
  Surround,  // radial distance in depth range at a uniform azimuth
};

struct SceneSpec {
  std::size_t num_points = 200;
  double depth_min = 10.0;  // m
  double depth_max = 60.0;  // m
  double lateral_spread = 6.0;   // m
  double vertical_spread = 3.0;  // m
  SceneLayout layout = SceneLayout::Forward;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Static landmarks in the tau0 vehicle frame; deterministic in `spec.seed`.
std::vector<Vec3> generate_scene(const SceneSpec& spec);

enum class OutlierMode {
  UniformImage,      // tau1 pixel redrawn uniformly over the image
  WrongAssociation,  // tau1 endpoints rotated among the outlier matches
};

struct NoiseSpec {
  double pixel_sigma = 0.0;
  double outlier_fraction = 0.0;
  OutlierMode outlier_mode = OutlierMode::UniformImage;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SimulatedMatches {
  std::vector<MatchSet> sets;             // one per rig camera, rig order
  std::vector<std::vector<bool>> inlier;  // ground-truth labels, parallel to sets

  std::size_t size() const;
  /// Labels concatenated in match-set order (the order of EstimateResult::residuals).
  std::vector<bool> flat_labels() const;
};

/// Projects `points` through every rig camera at tau0 and after the vehicle
/// moved by `truth`. Points behind a camera or outside its image at either time
/// are dropped. Gaussian pixel noise is added before lifting to bearings, then
/// round(outlier_fraction * n) matches per camera are corrupted.
/// Throws NoVisiblePoints when no camera sees any point.
SimulatedMatches generate_matches(std::span<const Vec3> points, const CameraRig& rig, const MotionParams& truth,
                                  const NoiseSpec& noise);

/// Exhaustive minimum of multi_camera_energy over the axes in `bounds` (one per
/// free coordinate of `tmpl`; free coordinates without an axis keep their
/// template value). Ties resolve as in grid_candidate_better.
MotionParams grid_search_oracle(const CameraRig& rig, std::span<const MatchSet> sets, const GridSpec& bounds,
                                const MotionParams& tmpl, const RobustLoss& loss, MetricKind metric);

/// `frames` steps with total yaw `total_yaw` spread evenly (0 for straight driving).
struct SequenceSegment {
  std::size_t frames = 0;
  double total_yaw = 0.0;
};

/// Declarative simulation setup shared by the CLI and the tests.
struct Scenario {
  SceneSpec scene;
  NoiseSpec noise;
  CameraRig rig;
  MotionParams truth;  // used when `sequence` is empty
  std::vector<SequenceSegment> sequence;
  double speed = 1.0;            // arc length per frame in sequences, m
  double frame_interval = 0.1;   // s
  std::uint64_t seed = 0;
};

struct SimulatedFrame {
  MotionParams truth;
  SimulatedMatches matches;
};

/// Frame pairs of the scenario: one per sequence step, or a single pair from
/// `truth`. Each pair draws a fresh scene; the scene and noise seeds of pair k
/// are the (2k+1)-th and (2k+2)-th outputs of Xoshiro256(scenario.seed).
std::vector<SimulatedFrame> simulate_sequence(const Scenario& scenario);

/// Per-step truth motions of a sequence (straight steps have yaw 0).
std::vector<MotionParams> sequence_truth(const Scenario& scenario);

}  // namespace momo
