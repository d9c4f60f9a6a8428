#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "momo/geometry.hpp"

namespace momo {

struct ImageSize {
  double width = 0.0;
  double height = 0.0;
};

/// Rectangular lookup table of lines of sight sampled on a regular pixel grid.
///
/// Node (i, j) sits at pixel (origin_u + i * step_u, origin_v + j * step_v) and
/// is stored row-major at index j * cols + i. Queries between nodes are bilinear.
/// When every node points into the front hemisphere of the camera (z > 0) the
/// interpolation runs on normalized image-plane coordinates (x/z, y/z), which is
/// exact for tabulated pinhole cameras; otherwise it runs on the unit vectors.
class BearingTable {
 public:
  BearingTable(std::size_t cols, std::size_t rows, double origin_u, double origin_v, double step_u,
               double step_v, std::vector<Vec3> bearings);

  std::size_t cols() const { return cols_; }
  std::size_t rows() const { return rows_; }
  double origin_u() const { return origin_u_; }
  double origin_v() const { return origin_v_; }
  double step_u() const { return step_u_; }
  double step_v() const { return step_v_; }
  const std::vector<Vec3>& bearings() const { return bearings_; }
  bool planar() const { return planar_; }

  bool contains(PixelPoint p) const;
  Bearing bearing(PixelPoint p) const;
  PixelPoint project(const Vec3& point) const;

 private:
  Vec3 sample(double gu, double gv, Eigen::Matrix<double, 3, 2>* jac) const;

  std::size_t cols_;
  std::size_t rows_;
  double origin_u_;
  double origin_v_;
  double step_u_;
  double step_v_;
  std::vector<Vec3> bearings_;
  // Per-node interpolation payload: plane coordinates (x/z, y/z, 1) or unit vectors.
  std::vector<Vec3> nodes_;
  bool planar_ = false;
};

class CameraModel {
 public:
  struct Pinhole {
    PinholeIntrinsics intrinsics;
    ImageSize size;
  };

  static CameraModel pinhole(const PinholeIntrinsics& k, ImageSize size);
  static CameraModel generic(BearingTable table);

  bool is_pinhole() const { return std::holds_alternative<Pinhole>(model_); }
  /// Throws UnsupportedModel for generic cameras.
  const PinholeIntrinsics& intrinsics() const;
  const BearingTable* table() const { return std::get_if<BearingTable>(&model_); }
  ImageSize image_size() const;

  /// True when `p` lies inside the image (pinhole) or the table domain (generic).
  bool contains(PixelPoint p) const;

 private:
  friend Bearing bearing_from_pixel(const CameraModel& model, PixelPoint p);
  friend PixelPoint project(const CameraModel& model, const Vec3& point);

  explicit CameraModel(std::variant<Pinhole, BearingTable> m) : model_(std::move(m)) {}
  std::variant<Pinhole, BearingTable> model_;
};

/// Throws OutOfDomain for generic models queried outside their table.
Bearing bearing_from_pixel(const CameraModel& model, PixelPoint p);

/// Throws BehindCamera for points with z <= 0 (pinhole, or planar tables) and
/// OutOfDomain when a generic table has no pixel for the direction.
PixelPoint project(const CameraModel& model, const Vec3& point);

/// Samples `model` on a regular grid to build a generic table.
BearingTable tabulate(const CameraModel& model, std::size_t cols, std::size_t rows, double origin_u,
                      double origin_v, double step_u, double step_v);

}  // namespace momo
