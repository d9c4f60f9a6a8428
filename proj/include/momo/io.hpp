#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "momo/camera.hpp"
#include "momo/keyvalue.hpp"
#include "momo/manifold.hpp"
#include "momo/sim.hpp"

namespace momo {

// ---------------------------------------------------------------------------
// Rig calibration
//
//   [camera]
//   id = 0
//   model = pinhole                  # or: generic
//   intrinsics = fx fy cx cy skew    # pinhole; fx = .. fy = .. etc. also accepted
//   image = width height             # pinhole, optional (defaults to 2cx 2cy)
//   table = front.table              # generic, relative to the rig file
//   extrinsic = r00 r01 r02 tx r10 r11 r12 ty r20 r21 r22 tz
//
// Bearing tables are text: `size cols rows`, `origin u0 v0`, `step du dv`,
// then cols*rows lines `x y z` in row-major order.
// ---------------------------------------------------------------------------

/// Throws ParseError (with line and field) or CalibrationInvalid.
CameraRig load_rig(const std::filesystem::path& path);
/// Builds a rig from parsed `[camera]` sections; tables resolve against `base_dir`.
CameraRig rig_from_sections(std::span<const KeyValueSection> sections, const std::filesystem::path& base_dir,
                            const std::string& source);
/// Writes generic tables next to the rig as `<stem>_camera<id>.table`.
void save_rig(const CameraRig& rig, const std::filesystem::path& path);

BearingTable load_bearing_table(const std::filesystem::path& path);
void save_bearing_table(const BearingTable& table, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Matches: CSV with header `t0,t1,camera_id,u0,v0,u1,v1`, one match per line.
// ---------------------------------------------------------------------------

struct PixelMatch {
  PixelPoint p0;
  PixelPoint p1;
};

struct FramePairRecord {
  long long t0 = 0;
  long long t1 = 0;
  std::map<int, std::vector<PixelMatch>> matches;  // by camera id

  std::size_t size() const;
};

/// Records in file order. Throws ParseError, or NonMonotoneFrames when a new
/// frame pair does not start after the previous one or has t1 <= t0.
std::vector<FramePairRecord> load_matches(const std::filesystem::path& path);
void save_matches(std::span<const FramePairRecord> records, const std::filesystem::path& path);

/// Lifts pixel matches through the rig's camera models. Matches outside a
/// generic camera's table are dropped. Throws InvalidArgument for unknown cameras.
std::vector<MatchSet> to_match_sets(const FramePairRecord& record, const CameraRig& rig);
FramePairRecord to_record(long long t0, long long t1, std::span<const MatchSet> sets);

// ---------------------------------------------------------------------------
// Trajectories: KITTI odometry format, 12 reals per line (row-major [R|t]).
// ---------------------------------------------------------------------------

struct Trajectory {
  std::vector<Pose> poses;
  std::vector<double> timestamps;  // empty or one per pose
};

std::string format_pose_line(const Pose& pose);
void write_trajectory(const Trajectory& t, const std::filesystem::path& path);
Trajectory read_trajectory(const std::filesystem::path& path);

/// One real per line (scale files: meters per frame pair; timestamp files: seconds per frame).
std::vector<double> load_reals(const std::filesystem::path& path);
void save_reals(std::span<const double> values, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Scenario files
//
//   seed = 7
//   scene.num_points = 200      scene.depth_min = 10     scene.depth_max = 60
//   scene.lateral_spread = 6    scene.vertical_spread = 3
//   scene.layout = forward|surround
//   noise.pixel_sigma = 0.5     noise.outlier_fraction = 0.3
//   noise.outlier_mode = uniform_image|wrong_association
//   truth.yaw = 0.05  truth.arc_length = 1  truth.pitch = 0  truth.roll = 0
//   sequence = straight:200 curve:100:1.5707963 straight:200
//   sequence.speed = 1             sequence.frame_interval = 0.1
//   rig = rig.txt                  # or inline [camera] sections
// ---------------------------------------------------------------------------

Scenario load_scenario(const std::filesystem::path& path);

}  // namespace momo
