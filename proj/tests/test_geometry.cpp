#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "momo/camera.hpp"
#include "momo/error.hpp"
#include "momo/random.hpp"
#include "support.hpp"

using namespace momo;
using namespace momo::test;
using std::numbers::pi;

namespace {

Pose random_pose(Xoshiro256& rng, double t_min, double t_max) {
  Vec3 axis(rng.normal(), rng.normal(), rng.normal());
  Vec3 dir(rng.normal(), rng.normal(), rng.normal());
  return {Eigen::AngleAxisd(rng.uniform(-pi, pi), axis.normalized()).toRotationMatrix(),
          dir.normalized() * rng.uniform(t_min, t_max)};
}

bool same_pose(const Pose& a, const Pose& b, double tol) { return max_abs(a.matrix() - b.matrix()) <= tol; }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected momo::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("core_geometry") {
  TEST_CASE("compose and inverse follow the group laws") {
    Xoshiro256 rng(1);
    const Pose p = random_pose(rng, 0.0, 5.0);
    CHECK(same_pose(compose(Pose::identity(), p), p, 1e-15));
    CHECK(same_pose(compose(p, inverse(p)), Pose::identity(), 1e-12));
    CHECK(same_pose(inverse(inverse(p)), p, 1e-12));
    CHECK(max_abs(compose(Pose{rot_z(pi / 2), Vec3::Zero()}, Pose{rot_z(pi / 2), Vec3::Zero()}).rotation -
                  rot_z(pi)) < 1e-15);

    const Pose shift{Mat3::Identity(), {1, 2, 3}};
    CHECK(inverse(shift).translation.isApprox(Vec3(-1, -2, -3)));
    CHECK(same_pose(inverse(Pose::identity()), Pose::identity(), 0.0));

    // Applying b then a.
    const Pose a = random_pose(rng, 0.0, 5.0);
    const Pose b = random_pose(rng, 0.0, 5.0);
    const Vec3 x(0.3, -1.2, 4.0);
    CHECK((compose(a, b).apply(x) - a.apply(b.apply(x))).norm() < 1e-12);
  }

  TEST_CASE("group axioms hold for random poses") {
    Xoshiro256 rng(2);
    for (int i = 0; i < 200; ++i) {
      const Pose a = random_pose(rng, 0.0, 10.0);
      const Pose b = random_pose(rng, 0.0, 10.0);
      const Pose c = random_pose(rng, 0.0, 10.0);
      CHECK(same_pose(compose(compose(a, b), c), compose(a, compose(b, c)), 1e-12));
      CHECK(same_pose(compose(a, inverse(a)), Pose::identity(), 1e-12));
      CHECK(compose(a, b).is_valid());
    }
  }

  TEST_CASE("pose validity and matrix layout") {
    const Pose p{rot_x(0.3) * rot_y(-0.2), {4, 5, 6}};
    const auto m = p.matrix();
    CHECK(m.leftCols<3>() == p.rotation);
    CHECK(m.col(3) == p.translation);
    CHECK(same_pose(Pose::from_matrix(m), p, 0.0));
    CHECK(p.is_valid());
    Pose scaled = p;
    scaled.rotation *= 1.001;
    CHECK_FALSE(scaled.is_valid());
    Pose reflected = p;
    reflected.rotation.col(0) *= -1.0;
    CHECK_FALSE(reflected.is_valid());
  }

  TEST_CASE("rotation_angle") {
    CHECK(rotation_angle(Mat3::Identity()) == doctest::Approx(0.0));
    CHECK(rotation_angle(rot_z(0.25)) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(rotation_angle(rot_x(pi)) == doctest::Approx(pi).epsilon(1e-12));
    CHECK(rotation_angle(rot_y(-1e-7)) == doctest::Approx(1e-7).epsilon(1e-6));
  }

  TEST_CASE("skew is the cross-product matrix") {
    Mat3 expected;
    expected << 0, 0, 0, 0, 0, -1, 0, 1, 0;
    CHECK(skew({1, 0, 0}) == expected);
    CHECK(skew(Vec3::Zero()) == Mat3::Zero());
    const Vec3 t(0.3, -2.0, 1.5);
    const Vec3 v(-1.0, 0.5, 4.0);
    CHECK((skew(t) * v - t.cross(v)).norm() < 1e-15);
    CHECK((skew(t) * t).norm() < 1e-15);
    CHECK(skew(t).transpose() == -skew(t));
  }

  TEST_CASE("essential matrix construction") {
    CHECK(essential_from_motion({Mat3::Identity(), {1, 0, 0}}).m == skew({1, 0, 0}));
    CHECK(code_of([] { essential_from_motion(Pose::identity()); }) == ErrorCode::DegenerateTranslation);
  }

  TEST_CASE("essential matrix rank and epipolar constraint on random motions") {
    Xoshiro256 rng(3);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Pose m = random_pose(rng, 0.1, 10.0);
      const auto e = essential_from_motion(m);
      const Eigen::JacobiSVD<Mat3> svd(e.m);
      const auto s = svd.singularValues();
      CHECK(s[2] < 1e-9 * s[0]);
      CHECK(std::abs(s[0] - s[1]) < 1e-9 * s[0]);
      const Vec3 x0(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(1, 50));
      const auto b0 = Bearing::from_direction(x0);
      const auto b1 = Bearing::from_direction(m.apply(x0));
      worst = std::max(worst, std::abs(b1.direction().dot(e.m * b0.direction())));
    }
    CHECK(worst < 1e-10);
  }

  TEST_CASE("fundamental matrix") {
    const EssentialMatrix e{skew({1, 0, 0})};
    CHECK(fundamental_from_essential(e, {}, {}).m == e.m);

    const PinholeIntrinsics k{100, 100, 0, 0, 0};
    const Mat3 kinv = Eigen::Vector3d(0.01, 0.01, 1).asDiagonal();
    CHECK(max_abs(fundamental_from_essential(e, k, k).m - kinv.transpose() * e.m * kinv) < 1e-15);

    // Pixel correspondences from projecting through a rig camera.
    const CameraRig rig = single_camera_rig();
    const auto points = generate_scene(scene(100, 4));
    const MotionParams truth = motion(0.07, 1.3);
    const Pose m = camera_point_motion(pose_from_params(truth), rig.cameras()[0].extrinsic);
    const auto f = fundamental_from_essential(essential_from_motion(m), hd_intrinsics(), hd_intrinsics());
    const auto sim = generate_matches(points, rig, truth, {});
    for (const auto& match : sim.sets[0].matches) {
      CHECK(std::abs(match.pixel_t1.homogeneous().dot(f.m * match.pixel_t0.homogeneous())) < 1e-8);
    }
  }

  TEST_CASE("bearings") {
    CHECK(Bearing::from_direction({0, 3, 4}).direction().isApprox(Vec3(0, 0.6, 0.8)));
    CHECK(code_of([] { Bearing::from_direction(Vec3::Zero()); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { Bearing::from_direction({NAN, 0, 1}); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("pinhole lifting and projection") {
    const auto unit = CameraModel::pinhole({1, 1, 0, 0, 0}, {10, 10});
    CHECK(bearing_from_pixel(unit, {0, 0}).direction() == Vec3(0, 0, 1));
    const auto k100 = CameraModel::pinhole({100, 100, 0, 0, 0}, {200, 200});
    CHECK((bearing_from_pixel(k100, {100, 0}).direction() - Vec3(1, 0, 1) / std::sqrt(2.0)).norm() < 1e-15);

    const PixelPoint a = project(unit, {0, 0, 5});
    CHECK(a.u == 0.0);
    CHECK(a.v == 0.0);
    const PixelPoint b = project(CameraModel::pinhole({100, 100, 50, 50, 0}, {100, 100}), {1, 1, 1});
    CHECK(b.u == doctest::Approx(150));
    CHECK(b.v == doctest::Approx(150));

    CHECK(code_of([&] { project(unit, {0, 0, -1}); }) == ErrorCode::BehindCamera);
    CHECK(code_of([&] { project(unit, {1, 0, 0}); }) == ErrorCode::BehindCamera);
    CHECK(code_of([] { CameraModel::pinhole({0, 1, 0, 0, 0}, {1, 1}); }) == ErrorCode::CalibrationInvalid);
  }

  TEST_CASE("project then lift recovers the direction") {
    Xoshiro256 rng(5);
    const auto cam = CameraModel::pinhole({700, 690, 640, 360, 1.5}, hd_size());
    for (int i = 0; i < 500; ++i) {
      const Vec3 x(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(0.5, 80));
      const Vec3 b = bearing_from_pixel(cam, project(cam, x)).direction();
      CHECK(std::atan2(b.cross(x).norm(), b.dot(x)) < 1e-9);
    }
  }

  TEST_CASE("generic table agrees with the pinhole it tabulates") {
    const auto pin = hd_pinhole();
    const auto gen = CameraModel::generic(tabulate(pin, 33, 19, 0.0, 0.0, 40.0, 40.0));
    CHECK_FALSE(gen.is_pinhole());
    CHECK(gen.table()->planar());
    Xoshiro256 rng(6);
    double worst_dir = 0.0;
    double worst_px = 0.0;
    for (int i = 0; i < 300; ++i) {
      const PixelPoint p{rng.uniform(0, 1280), rng.uniform(0, 720)};
      const Vec3 bp = bearing_from_pixel(pin, p).direction();
      const Vec3 bg = bearing_from_pixel(gen, p).direction();
      worst_dir = std::max(worst_dir, (bp - bg).norm());
      const PixelPoint back = project(gen, bg);
      worst_px = std::max(worst_px, std::hypot(back.u - p.u, back.v - p.v));
    }
    CHECK(worst_dir < 1e-9);
    CHECK(worst_px < 1e-6);
    CHECK(code_of([&] { bearing_from_pixel(gen, {-5, 10}); }) == ErrorCode::OutOfDomain);
    CHECK(code_of([&] { gen.intrinsics(); }) == ErrorCode::UnsupportedModel);
  }

  TEST_CASE("generic table with a wide field of view") {
    // Equidistant fisheye, 200 degrees across: interpolation on unit vectors.
    const std::size_t n = 41;
    std::vector<Vec3> b;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const double x = (static_cast<double>(i) - 20.0) / 20.0;
        const double y = (static_cast<double>(j) - 20.0) / 20.0;
        const double r = std::hypot(x, y);
        const double theta = r * (100.0 * pi / 180.0);
        const double phi = std::atan2(y, x);
        b.emplace_back(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
      }
    }
    const BearingTable table(n, n, 0.0, 0.0, 10.0, 10.0, b);
    CHECK_FALSE(table.planar());
    const auto cam = CameraModel::generic(table);
    Xoshiro256 rng(7);
    for (int i = 0; i < 200; ++i) {
      const PixelPoint p{rng.uniform(20, 380), rng.uniform(20, 380)};
      const Bearing dir = bearing_from_pixel(cam, p);
      CHECK(std::abs(dir.direction().norm() - 1.0) < 1e-12);
      const PixelPoint back = project(cam, 3.0 * dir.direction());
      CHECK(std::hypot(back.u - p.u, back.v - p.v) < 1e-6);
    }
  }
}
