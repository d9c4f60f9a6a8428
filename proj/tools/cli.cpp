#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "momo/estimator.hpp"
#include "momo/evaluation.hpp"
#include "momo/io.hpp"
#include "momo/sequence.hpp"
#include "momo/sim.hpp"

namespace momo {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

/// Usage problems detected after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::map<std::string, MetricKind> kMetrics = {{"angleplane", MetricKind::AnglePlane},
                                                   {"geoline", MetricKind::GeoLine}};
const std::map<std::string, LossKind> kLosses = {{"cauchy", LossKind::Cauchy},
                                                 {"huber", LossKind::Huber},
                                                 {"tukey", LossKind::Tukey},
                                                 {"none", LossKind::None}};

struct ObjectiveArgs {
  std::string metric = "angleplane";
  std::string loss = "cauchy";
  double loss_width = kDefaultCauchyWidth;

  void add_to(CLI::App& app) {
    app.add_option("--metric", metric, "Epipolar error metric")
        ->check(CLI::IsMember({"angleplane", "geoline"}))
        ->capture_default_str();
    app.add_option("--loss", loss, "Robust loss")
        ->check(CLI::IsMember({"cauchy", "huber", "tukey", "none"}))
        ->capture_default_str();
    app.add_option("--loss-width", loss_width, "Robust loss width (sine units for angleplane, px for geoline)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }
  MetricKind metric_kind() const { return kMetrics.at(metric); }
  RobustLoss robust_loss() const { return {kLosses.at(loss), loss_width}; }
};

struct EstimateArgs {
  std::string rig;
  std::string matches;
  std::string output;
  std::string diagnostics;
  std::string scale;
  std::string scale_mode = "fixed";
  double initial_scale = 1.0;
  double curve_threshold = 0.01;
  int max_iterations = 100;
  double gradient_tolerance = 1e-10;
  double step_tolerance = 1e-12;
  std::string jacobian = "numeric";
  ObjectiveArgs objective;
};

struct LandscapeArgs {
  std::string scenario;
  std::string rig;
  std::string matches;
  std::size_t pair = 0;
  double yaw_min = -0.3;
  double yaw_max = 0.3;
  std::size_t yaw_steps = 41;
  std::optional<double> arc_min;
  std::optional<double> arc_max;
  std::size_t arc_steps = 41;
  bool normalize = false;
  std::optional<std::uint64_t> seed;
  std::string output;
  ObjectiveArgs objective;
};

struct SimulateArgs {
  std::string scenario;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

struct EvalArgs {
  std::string estimate;
  std::string ground_truth;
  std::string times;
  std::string diagnostics;
  std::string output;
  std::vector<double> lengths = {100, 200, 300, 400, 500, 600, 700, 800};
  std::size_t step = 10;
};

json params_json(const MotionParams& p) {
  return {{"yaw", p.yaw}, {"arc_length", p.arc_length}, {"pitch", p.pitch}, {"roll", p.roll}};
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  return f;
}

int run_estimate(const EstimateArgs& a, std::ostream& out) {
  const CameraRig rig = load_rig(a.rig);
  const auto records = load_matches(a.matches);

  ScaleSource scale;
  scale.mode = a.scale_mode == "fixed" ? ScaleMode::Fixed : ScaleMode::FreeInCurves;
  scale.initial = a.initial_scale;
  if (!a.scale.empty()) {
    scale.per_frame = load_reals(a.scale);
  } else if (scale.mode == ScaleMode::Fixed) {
    throw UsageError("--scale-mode fixed requires --scale FILE");
  }

  SequenceOptions opts;
  opts.curve_threshold = a.curve_threshold;
  opts.estimator.metric = a.objective.metric_kind();
  opts.estimator.loss = a.objective.robust_loss();
  opts.estimator.max_iterations = a.max_iterations;
  opts.estimator.gradient_tolerance = a.gradient_tolerance;
  opts.estimator.step_tolerance = a.step_tolerance;
  opts.estimator.jacobian = a.jacobian == "analytic" ? JacobianMode::Analytic : JacobianMode::Numeric;

  const auto result = run_sequence(rig, records, scale, opts);
  write_trajectory(result.trajectory, a.output);

  std::size_t failed = 0;
  std::optional<std::ofstream> diag;
  if (!a.diagnostics.empty()) diag = open_output(a.diagnostics);
  for (const auto& f : result.frames) {
    failed += f.failed ? 1 : 0;
    if (!diag) continue;
    json j = {{"t0", f.t0},
              {"t1", f.t1},
              {"failed", f.failed},
              {"params", params_json(f.motion)},
              {"scale_free", f.scale_free},
              {"runtime_ms", f.runtime_ms}};
    if (f.estimate) {
      j["energy"] = f.estimate->final_energy;
      j["iterations"] = f.estimate->iterations;
      j["converged"] = f.estimate->converged;
      j["condition_note"] = std::string(to_string(f.estimate->condition_note));
      j["skipped_matches"] = f.estimate->skipped_matches;
    } else {
      j["error"] = f.error;
    }
    *diag << j.dump() << '\n';
  }
  out << "estimated " << result.frames.size() << " frame pairs (" << failed << " failed), trajectory -> "
      << a.output << '\n';
  return failed == result.frames.size() ? kExitNumeric : kExitOk;
}

int run_landscape(const LandscapeArgs& a, std::ostream& out) {
  std::optional<CameraRig> rig;
  std::vector<MatchSet> sets;
  MotionParams fixed;
  if (!a.scenario.empty()) {
    Scenario scenario = load_scenario(a.scenario);
    if (a.seed) scenario.seed = *a.seed;
    const auto frames = simulate_sequence(scenario);
    if (a.pair >= frames.size()) throw UsageError("--pair beyond the scenario's frame pairs");
    sets = frames[a.pair].matches.sets;
    fixed = frames[a.pair].truth;
    rig.emplace(std::move(scenario.rig));
  } else {
    if (a.rig.empty() || a.matches.empty()) throw UsageError("landscape needs --scenario or --rig and --matches");
    if (!a.arc_min || !a.arc_max) throw UsageError("--arc-min and --arc-max are required with --matches");
    rig.emplace(load_rig(a.rig));
    const auto records = load_matches(a.matches);
    if (a.pair >= records.size()) throw UsageError("--pair beyond the recorded frame pairs");
    sets = to_match_sets(records[a.pair], *rig);
  }
  LandscapeGrid grid;
  grid.yaw = {a.yaw_min, a.yaw_max, a.yaw_steps};
  grid.arc_length = {a.arc_min.value_or(0.5 * fixed.arc_length), a.arc_max.value_or(1.5 * fixed.arc_length),
                     a.arc_steps};
  if (!(grid.yaw.max > grid.yaw.min) || !(grid.arc_length.max > grid.arc_length.min)) {
    throw UsageError("landscape ranges need max > min");
  }
  Landscape land = energy_landscape(*rig, sets, grid, fixed, a.objective.robust_loss(), a.objective.metric_kind());
  if (a.normalize) land = land.normalized();

  std::ostringstream csv;
  csv << "yaw,arc_length,energy\n";
  for (std::size_t i = 0; i < grid.yaw.steps; ++i) {
    for (std::size_t j = 0; j < grid.arc_length.steps; ++j) {
      const double e = land.energy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      csv << format_real(grid.yaw.at(i)) << ',' << format_real(grid.arc_length.at(j)) << ','
          << (std::isfinite(e) ? format_real(e) : std::string("nan")) << '\n';
    }
  }
  if (a.output.empty()) {
    out << csv.str();
  } else {
    auto f = open_output(a.output);
    f << csv.str();
    const auto [bi, bj] = land.argmin();
    out << "landscape minimum at yaw " << grid.yaw.at(bi) << ", arc_length " << grid.arc_length.at(bj) << '\n';
  }
  return kExitOk;
}

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  Scenario scenario = load_scenario(a.scenario);
  if (a.seed) scenario.seed = *a.seed;
  const auto frames = simulate_sequence(scenario);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  std::vector<FramePairRecord> records;
  Trajectory gt;
  gt.poses.push_back(Pose::identity());
  gt.timestamps.push_back(0.0);
  std::vector<double> scale;
  std::ofstream labels = open_output((dir / "labels.csv").string());
  labels << "t0,t1,camera_id,index,inlier\n";
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto t0 = static_cast<long long>(k);
    const auto& f = frames[k];
    records.push_back(to_record(t0, t0 + 1, f.matches.sets));
    gt.poses.push_back(gt.poses.back() * pose_from_params(f.truth));
    gt.timestamps.push_back(static_cast<double>(k + 1) * scenario.frame_interval);
    scale.push_back(f.truth.arc_length);
    for (std::size_t s = 0; s < f.matches.sets.size(); ++s) {
      for (std::size_t i = 0; i < f.matches.inlier[s].size(); ++i) {
        labels << t0 << ',' << t0 + 1 << ',' << f.matches.sets[s].camera_id << ',' << i << ','
               << (f.matches.inlier[s][i] ? 1 : 0) << '\n';
      }
    }
  }
  save_matches(records, dir / "matches.csv");
  write_trajectory(gt, dir / "groundtruth.txt");
  save_reals(gt.timestamps, dir / "times.txt");
  save_reals(scale, dir / "scale.txt");
  save_rig(scenario.rig, dir / "rig.txt");
  out << "simulated " << frames.size() << " frame pairs into " << dir.string() << '\n';
  return kExitOk;
}

int run_eval(const EvalArgs& a, std::ostream& out) {
  Trajectory est = read_trajectory(a.estimate);
  Trajectory gt = read_trajectory(a.ground_truth);
  if (!a.times.empty()) gt.timestamps = load_reals(a.times);

  std::vector<double> runtimes;
  if (!a.diagnostics.empty()) {
    std::ifstream in(a.diagnostics);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + a.diagnostics + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("runtime_ms") || !j["runtime_ms"].is_number()) {
        throw Error(ErrorCode::ParseError,
                    a.diagnostics + ":" + std::to_string(line_no) + ": expected a JSON object with runtime_ms");
      }
      runtimes.push_back(j["runtime_ms"].get<double>());
    }
  }

  EvalOptions opts;
  opts.lengths = a.lengths;
  opts.step = a.step;
  const EvalReport report = evaluate(est, gt, opts, runtimes);

  std::ostringstream csv;
  csv << "bucket,key,rotation_deg_per_m,translation_percent,segments\n";
  for (const auto& b : report.by_length) {
    csv << "length," << format_real(b.key) << ',' << format_real(b.rotation_deg_per_m) << ','
        << format_real(b.translation_percent) << ',' << b.count << '\n';
  }
  for (const auto& b : report.by_speed) {
    csv << "speed," << format_real(b.key) << ',' << format_real(b.rotation_deg_per_m) << ','
        << format_real(b.translation_percent) << ',' << b.count << '\n';
  }
  csv << "all,0," << format_real(report.rotation_deg_per_m) << ',' << format_real(report.translation_percent) << ','
      << report.segments.size() << '\n';
  if (!a.output.empty()) {
    auto f = open_output(a.output);
    f << csv.str();
  }

  out << std::fixed;
  out << "segment length [m]   rotation [deg/m]   translation [%]   segments\n";
  for (const auto& b : report.by_length) {
    out << std::setw(18) << std::setprecision(0) << b.key << std::setw(19) << std::setprecision(6)
        << b.rotation_deg_per_m << std::setw(18) << std::setprecision(3) << b.translation_percent << std::setw(11)
        << b.count << '\n';
  }
  if (!report.by_speed.empty()) {
    out << "speed bucket [m/s]   rotation [deg/m]   translation [%]   segments\n";
    for (const auto& b : report.by_speed) {
      out << std::setw(18) << std::setprecision(1) << b.key << std::setw(19) << std::setprecision(6)
          << b.rotation_deg_per_m << std::setw(18) << std::setprecision(3) << b.translation_percent
          << std::setw(11) << b.count << '\n';
    }
  }
  out << "overall: rotation " << std::setprecision(6) << report.rotation_deg_per_m << " deg/m, translation "
      << std::setprecision(3) << report.translation_percent << " %\n";
  if (report.runtime) {
    out << "runtime: mean " << report.runtime->mean_ms << " ms, median " << report.runtime->median_ms
        << " ms, max " << report.runtime->max_ms << " ms over " << report.runtime->count << " frames\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frame-to-frame vehicle motion estimation on the single-track manifold", "momo"};
  app.set_config("--config", "", "Config file (INI/TOML, one [subcommand] section each); flags win");
  app.require_subcommand(1, 1);

  EstimateArgs est;
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate a trajectory from per-frame feature matches");
  estimate_cmd->add_option("--rig", est.rig, "Rig calibration file")->required();
  estimate_cmd->add_option("--matches", est.matches, "Matches CSV")->required();
  estimate_cmd->add_option("--output", est.output, "Trajectory output (KITTI format)")->required();
  estimate_cmd->add_option("--diagnostics", est.diagnostics, "Per-frame JSON-lines diagnostics output");
  estimate_cmd->add_option("--scale", est.scale, "Scale file: arc length per frame pair (odometer)");
  estimate_cmd->add_option("--scale-mode", est.scale_mode, "Arc length source")
      ->check(CLI::IsMember({"fixed", "free-in-curves"}))
      ->capture_default_str();
  estimate_cmd->add_option("--initial-scale", est.initial_scale, "Arc length before the first curve (free-in-curves)")
      ->capture_default_str();
  estimate_cmd->add_option("--curve-threshold", est.curve_threshold, "Prior |yaw| that frees the arc length [rad]")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  estimate_cmd->add_option("--max-iterations", est.max_iterations)->check(CLI::PositiveNumber)->capture_default_str();
  estimate_cmd->add_option("--gradient-tolerance", est.gradient_tolerance)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  estimate_cmd->add_option("--step-tolerance", est.step_tolerance)->check(CLI::PositiveNumber)->capture_default_str();
  estimate_cmd->add_option("--jacobian", est.jacobian, "Jacobian evaluation")
      ->check(CLI::IsMember({"numeric", "analytic"}))
      ->capture_default_str();
  est.objective.add_to(*estimate_cmd);

  LandscapeArgs land;
  auto* landscape_cmd = app.add_subcommand("landscape", "Dump the energy over a yaw x arc-length grid as CSV");
  landscape_cmd->add_option("--scenario", land.scenario, "Scenario file (simulated pair)");
  landscape_cmd->add_option("--rig", land.rig, "Rig calibration file");
  landscape_cmd->add_option("--matches", land.matches, "Matches CSV");
  landscape_cmd->add_option("--pair", land.pair, "Frame pair index")->capture_default_str();
  landscape_cmd->add_option("--yaw-min", land.yaw_min)->capture_default_str();
  landscape_cmd->add_option("--yaw-max", land.yaw_max)->capture_default_str();
  landscape_cmd->add_option("--yaw-steps", land.yaw_steps)->check(CLI::Range(2, 100000))->capture_default_str();
  landscape_cmd->add_option("--arc-min", land.arc_min, "Default: half the true arc length (scenarios)");
  landscape_cmd->add_option("--arc-max", land.arc_max, "Default: 1.5 times the true arc length (scenarios)");
  landscape_cmd->add_option("--arc-steps", land.arc_steps)->check(CLI::Range(2, 100000))->capture_default_str();
  landscape_cmd->add_flag("--normalize", land.normalize, "Report percent of the maximum energy");
  landscape_cmd->add_option("--seed", land.seed, "Override the scenario seed");
  landscape_cmd->add_option("--output", land.output, "CSV output (default: stdout)");
  land.objective.add_to(*landscape_cmd);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Generate matches, ground truth and scale from a scenario");
  simulate_cmd->add_option("--scenario", sim.scenario, "Scenario file")->required();
  simulate_cmd->add_option("--out-dir", sim.out_dir, "Output directory")->required();
  simulate_cmd->add_option("--seed", sim.seed, "Override the scenario seed");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Segment-based rotation/translation error against ground truth");
  eval_cmd->add_option("--estimate", ev.estimate, "Estimated trajectory")->required();
  eval_cmd->add_option("--ground-truth", ev.ground_truth, "Ground-truth trajectory")->required();
  eval_cmd->add_option("--times", ev.times, "Timestamps, one per pose (enables speed buckets)");
  eval_cmd->add_option("--diagnostics", ev.diagnostics, "Diagnostics JSON lines (runtime statistics)");
  eval_cmd->add_option("--lengths", ev.lengths, "Segment lengths [m]")->delimiter(',')->capture_default_str();
  eval_cmd->add_option("--step", ev.step, "Frames between segment starts")->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--output", ev.output, "Report CSV output");

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back("momo");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_storage) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (estimate_cmd->parsed()) return run_estimate(est, out);
    if (landscape_cmd->parsed()) return run_landscape(land, out);
    if (simulate_cmd->parsed()) return run_simulate(sim, out);
    if (eval_cmd->parsed()) return run_eval(ev, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace momo
