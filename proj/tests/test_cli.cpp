#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "momo/io.hpp"

using namespace momo;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

struct Workspace {
  fs::path dir = fs::temp_directory_path() / "momo_cli_test";
  Workspace() {
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "scenario.txt") << R"(seed = 3
scene.num_points = 150
scene.depth_min = 10
noise.pixel_sigma = 0.3
noise.outlier_fraction = 0.1
sequence = straight:30 curve:20:0.4 straight:60
[camera]
id = 0
model = pinhole
intrinsics = 700 700 640 360 0
extrinsic = 0 0 1 1.5  -1 0 0 1  0 -1 0 0
[camera]
id = 1
model = pinhole
intrinsics = 700 700 640 360 0
extrinsic = 0 0 1 1.5  -1 0 0 -1  0 -1 0 0
)";
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string at(const std::string& f) const { return (dir / f).string(); }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 1") {
    const auto unknown = run({"estimate", "--bogus"});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("Usage") != std::string::npos);
    CHECK(run({}).code == 1);
    CHECK(run({"eval"}).code == 1);
    CHECK(run({"--help"}).code == 0);
  }

  TEST_CASE("data errors exit 2") {
    Workspace ws;
    const auto missing = run({"estimate", "--rig", ws.at("nope.txt"), "--matches", ws.at("nope.csv"), "--scale",
                              ws.at("s.txt"), "--output", ws.at("o.txt")});
    CHECK(missing.code == 2);
    CHECK_FALSE(missing.err.empty());
  }

  TEST_CASE("simulate, estimate, eval") {
    Workspace ws;
    const auto sim = run({"simulate", "--scenario", ws.at("scenario.txt"), "--out-dir", ws.at("out")});
    REQUIRE(sim.code == 0);
    for (const char* f : {"matches.csv", "groundtruth.txt", "rig.txt", "scale.txt", "times.txt", "labels.csv"}) {
      CHECK(fs::exists(ws.dir / "out" / f));
    }
    CHECK(load_matches(ws.dir / "out" / "matches.csv").size() == 110);

    // Fixed scale without a scale file is a usage error.
    CHECK(run({"estimate", "--rig", ws.at("out/rig.txt"), "--matches", ws.at("out/matches.csv"), "--output",
               ws.at("est.txt")})
              .code == 1);

    const auto est = run({"estimate", "--rig", ws.at("out/rig.txt"), "--matches", ws.at("out/matches.csv"),
                          "--scale", ws.at("out/scale.txt"), "--scale-mode", "free-in-curves", "--output",
                          ws.at("est.txt"), "--diagnostics", ws.at("diag.jsonl")});
    REQUIRE(est.code == 0);
    std::ifstream diag(ws.dir / "diag.jsonl");
    std::string line;
    std::size_t n = 0;
    while (std::getline(diag, line)) {
      const auto j = nlohmann::json::parse(line);
      CHECK(j.contains("params"));
      CHECK(j.contains("energy"));
      CHECK(j.contains("iterations"));
      CHECK(j.contains("condition_note"));
      CHECK(j.contains("runtime_ms"));
      CHECK(j["failed"] == false);
      ++n;
    }
    CHECK(n == 110);

    const auto ev = run({"eval", "--estimate", ws.at("est.txt"), "--ground-truth", ws.at("out/groundtruth.txt"),
                         "--times", ws.at("out/times.txt"), "--diagnostics", ws.at("diag.jsonl"), "--lengths",
                         "100", "--output", ws.at("report.csv")});
    REQUIRE(ev.code == 0);
    CHECK(ev.out.find("overall") != std::string::npos);
    std::ifstream report(ws.dir / "report.csv");
    std::getline(report, line);
    CHECK(line == "bucket,key,rotation_deg_per_m,translation_percent,segments");

    const auto too_long = run({"eval", "--estimate", ws.at("est.txt"), "--ground-truth",
                               ws.at("out/groundtruth.txt"), "--lengths", "800"});
    CHECK(too_long.code == 2);
  }

  TEST_CASE("config file merges with flags, flags win") {
    Workspace ws;
    REQUIRE(run({"simulate", "--scenario", ws.at("scenario.txt"), "--out-dir", ws.at("out")}).code == 0);
    std::ofstream(ws.dir / "momo.ini") << "[landscape]\nscenario = " << ws.at("scenario.txt")
                                       << "\nyaw-steps = 5\narc-steps = 4\noutput = " << ws.at("cfg.csv") << "\n";
    const auto land = run({"--config", ws.at("momo.ini"), "landscape", "--arc-steps", "3", "--normalize"});
    REQUIRE(land.code == 0);
    std::ifstream csv(ws.dir / "cfg.csv");
    std::string line;
    std::size_t rows = 0;
    std::getline(csv, line);
    CHECK(line == "yaw,arc_length,energy");
    double max_energy = 0.0;
    while (std::getline(csv, line)) {
      ++rows;
      max_energy = std::max(max_energy, std::stod(line.substr(line.rfind(',') + 1)));
    }
    CHECK(rows == 15);
    CHECK(max_energy == doctest::Approx(100.0));

    const auto pair = run({"landscape", "--rig", ws.at("out/rig.txt"), "--matches", ws.at("out/matches.csv"),
                           "--pair", "40", "--arc-min", "0.5", "--arc-max", "1.5", "--yaw-steps", "3",
                           "--arc-steps", "2"});
    CHECK(pair.code == 0);
    CHECK(pair.out.rfind("yaw,arc_length,energy\n", 0) == 0);
  }

  TEST_CASE("every frame failing exits 3") {
    Workspace ws;
    std::ofstream(ws.dir / "rig.txt") << "[camera]\nid = 0\nmodel = pinhole\nintrinsics = 700 700 640 360 0\n"
                                         "extrinsic = 0 0 1 0  -1 0 0 0  0 -1 0 0\n";
    std::ofstream(ws.dir / "m.csv") << "t0,t1,camera_id,u0,v0,u1,v1\n0,1,0,100,100,100,100\n";
    std::ofstream(ws.dir / "s.txt") << "0\n";
    const auto r = run({"estimate", "--rig", ws.at("rig.txt"), "--matches", ws.at("m.csv"), "--scale",
                        ws.at("s.txt"), "--output", ws.at("o.txt")});
    CHECK(r.code == 3);
  }
}
