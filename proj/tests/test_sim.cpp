#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "momo/error.hpp"
#include "momo/random.hpp"
#include "momo/sim.hpp"
#include "support.hpp"

using namespace momo;
using namespace momo::test;

TEST_SUITE("sim_oracle") {
  TEST_CASE("xoshiro256** reference sequence") {
    Xoshiro256 zero(0);
    CHECK(zero() == 0x99ec5f36cb75f2b4ULL);
    CHECK(zero() == 0xbf6e1f784956452aULL);
    CHECK(zero() == 0x1a5f849d4933e6e0ULL);
    CHECK(zero() == 0x6aa594f1262d2d2cULL);

    Xoshiro256 a(42);
    CHECK(a() == 0x15780b2e0c2ec716ULL);
    CHECK(a() == 0x6104d9866d113a7eULL);
    CHECK(a() == 0xae17533239e499a1ULL);
    CHECK(a() == 0xecb8ad4703b360a1ULL);

    Xoshiro256 j(42);
    j.jump();
    CHECK(j() == 0x50086ef83cbf4f4aULL);
    CHECK(j() == 0xba285ec21347d703ULL);

    Xoshiro256 u(7);
    CHECK(u.uniform() == 0.7005764821796896);
    CHECK(u.uniform() == 0.2787512294737843);
  }

  TEST_CASE("random helpers stay in range") {
    Xoshiro256 rng(3);
    double mean = 0.0;
    double sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const auto k = rng.below(7);
      CHECK(k < 7);
      const double x = rng.normal();
      mean += x;
      sq += x * x;
    }
    mean /= n;
    CHECK(std::abs(mean) < 0.03);
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));
  }

  TEST_CASE("scene generation") {
    SceneSpec one;
    one.num_points = 1;
    one.depth_min = one.depth_max = 20.0;
    one.lateral_spread = 0.0;
    one.vertical_spread = 0.0;
    const auto single = generate_scene(one);
    REQUIRE(single.size() == 1);
    CHECK(single[0] == Vec3(20, 0, 0));

    const auto a = generate_scene(scene(500, 9));
    const auto b = generate_scene(scene(500, 9));
    CHECK(a == b);
    CHECK(a != generate_scene(scene(500, 10)));

    SceneSpec big = scene(10000, 11);
    const auto pts = generate_scene(big);
    double lo = INFINITY;
    double hi = -INFINITY;
    for (const auto& p : pts) {
      CHECK(p.x() >= big.depth_min);
      CHECK(p.x() <= big.depth_max);
      CHECK(std::abs(p.y()) <= big.lateral_spread);
      CHECK(std::abs(p.z()) <= big.vertical_spread);
      lo = std::min(lo, p.x());
      hi = std::max(hi, p.x());
    }
    CHECK((hi - lo) >= 0.9 * (big.depth_max - big.depth_min));

    big.layout = SceneLayout::Surround;
    for (const auto& p : generate_scene(big)) {
      const double r = std::hypot(p.x(), p.y());
      CHECK(r >= big.depth_min - 1e-12);
      CHECK(r <= big.depth_max + 1e-12);
    }

    SceneSpec bad = scene(10, 1);
    bad.depth_min = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = scene(0, 1);
    CHECK_THROWS_AS(bad.validate(), Error);
  }

  TEST_CASE("noise-free matches satisfy the epipolar constraint") {
    const auto rig = lateral_pair_rig();
    const MotionParams truth = motion(0.15, 1.4);
    const auto sim = generate_matches(generate_scene(scene(300, 12)), rig, truth, {});
    REQUIRE(sim.sets.size() == 2);
    for (const auto& set : sim.sets) {
      const Pose m = camera_point_motion(pose_from_params(truth), rig.camera(set.camera_id).extrinsic);
      const auto e = essential_from_motion(m);
      CHECK(set.matches.size() > 100);
      for (const auto& x : set.matches) {
        CHECK(std::abs(x.bearing_t1.direction().dot(e.m * x.bearing_t0.direction())) < 1e-10);
        CHECK(rig.camera(set.camera_id).model.contains(x.pixel_t0));
        CHECK(rig.camera(set.camera_id).model.contains(x.pixel_t1));
      }
    }
    const auto labels = sim.flat_labels();
    CHECK(std::all_of(labels.begin(), labels.end(), [](bool b) { return b; }));
  }

  TEST_CASE("outliers") {
    const auto rig = single_camera_rig();
    const auto points = generate_scene(scene(200, 13));
    const MotionParams truth = motion(0.05, 1.0);

    const auto all = generate_matches(points, rig, truth, {0.0, 1.0, OutlierMode::UniformImage, 1});
    const auto labels = all.flat_labels();
    CHECK(std::none_of(labels.begin(), labels.end(), [](bool b) { return b; }));

    for (auto mode : {OutlierMode::UniformImage, OutlierMode::WrongAssociation}) {
      const auto sim = generate_matches(points, rig, truth, {0.0, 0.3, mode, 2});
      const auto l = sim.flat_labels();
      const auto outliers = std::count(l.begin(), l.end(), false);
      CHECK(outliers == std::llround(0.3 * static_cast<double>(l.size())));
      const auto e = essential_from_motion(camera_point_motion(pose_from_params(truth), rig.cameras()[0].extrinsic));
      std::size_t i = 0;
      for (const auto& m : sim.sets[0].matches) {
        const double r = std::abs(angleplane_residual(e, m.bearing_t0, m.bearing_t1));
        if (l[i++]) CHECK(r < 1e-10);
      }
    }
  }

  TEST_CASE("pixel noise statistics") {
    const auto rig = single_camera_rig();
    const MotionParams truth = motion(0.05, 1.0);
    const auto sim = generate_matches(generate_scene(scene(2000, 14)), rig, truth,
                                      {0.5, 0.0, OutlierMode::UniformImage, 15});
    const auto e = essential_from_motion(camera_point_motion(pose_from_params(truth), rig.cameras()[0].extrinsic));
    double sum = 0.0;
    for (const auto& m : sim.sets[0].matches) sum += std::abs(angleplane_residual(e, m.bearing_t0, m.bearing_t1));
    const double mean = sum / static_cast<double>(sim.size());
    CHECK(mean > 0.5 / 700.0 / 2.0);
    CHECK(mean < 0.5 / 700.0 * 2.0);
  }

  TEST_CASE("visibility and errors") {
    const auto rig = single_camera_rig();
    std::vector<Vec3> behind = {{-10, 0, 0}, {-20, 1, 0}};
    CHECK_THROWS_AS(generate_matches(behind, rig, motion(0.0, 1.0), {}), Error);
    std::vector<Vec3> mixed = {{-10, 0, 0}, {20, 1, 0}, {20, 100, 0}};
    CHECK(generate_matches(mixed, rig, motion(0.0, 1.0), {}).size() == 1);
  }

  TEST_CASE("grid search oracle") {
    const auto rig = lateral_pair_rig();
    const GridSpec grid = GridSpec{}.with(Param::Yaw, {-0.3, 0.3, 41}).with(Param::ArcLength, {0.5, 1.5, 41});
    const MotionParams truth = motion(grid.axes[0]->at(26), grid.axes[1]->at(18), true);
    const auto sim = generate_matches(generate_scene(scene(200, 16)), rig, truth, {});
    const RobustLoss loss = RobustLoss::cauchy(kDefaultCauchyWidth);
    const auto best = grid_search_oracle(rig, sim.sets, grid, motion(0.0, 1.0, true), loss, MetricKind::AnglePlane);
    CHECK(std::abs(best.yaw - truth.yaw) <= grid.axes[0]->cell());
    CHECK(std::abs(best.arc_length - truth.arc_length) <= grid.axes[1]->cell());

    // Bounds that exclude the truth: the argmin lands on the nearest edge.
    const auto single = single_camera_rig();
    const auto one = generate_matches(generate_scene(scene(200, 17)), single, motion(0.2, 1.0), {});
    const GridSpec low = GridSpec{}.with(Param::Yaw, {-0.1, 0.1, 21});
    const auto edge = grid_search_oracle(single, one.sets, low, motion(0.0, 1.0), loss, MetricKind::AnglePlane);
    CHECK(edge.yaw == doctest::Approx(0.1));

    // Free coordinates without an axis keep their template value.
    const auto kept = grid_search_oracle(single, one.sets, low, motion(0.0, 1.7, true), loss, MetricKind::AnglePlane);
    CHECK(kept.arc_length == 1.7);
  }

  TEST_CASE("sequences") {
    Scenario s{scene(150, 0), {0.3, 0.1, OutlierMode::UniformImage, 0}, lateral_pair_rig(), motion(0.0, 1.0), {}};
    s.sequence = {{5, 0.0}, {4, 0.2}};
    s.speed = 2.0;
    s.seed = 99;
    const auto truth = sequence_truth(s);
    REQUIRE(truth.size() == 9);
    CHECK(truth[0].yaw == 0.0);
    CHECK(truth[5].yaw == doctest::Approx(0.05));
    CHECK(truth[8].arc_length == 2.0);
    const auto frames = simulate_sequence(s);
    REQUIRE(frames.size() == 9);
    const auto again = simulate_sequence(s);
    CHECK(frames[3].matches.sets[0].matches[0].pixel_t1.u == again[3].matches.sets[0].matches[0].pixel_t1.u);
    CHECK(frames[3].matches.sets[0].matches[0].pixel_t1.u != frames[4].matches.sets[0].matches[0].pixel_t1.u);

    s.sequence.clear();
    s.truth = motion(0.07, 1.3);
    const auto pair = simulate_sequence(s);
    REQUIRE(pair.size() == 1);
    CHECK(pair[0].truth == s.truth);
  }
}
