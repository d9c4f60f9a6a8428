#include "momo/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/SVD>

namespace momo {

namespace fs = std::filesystem;

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  return out;
}

void check_written(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failure on '" + path.string() + "'");
}

[[noreturn]] void parse_fail(const std::string& source, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

Pose checked_extrinsic(const KeyValueEntry& e, const std::string& source) {
  const auto v = parse_reals(e, source, 12);
  Eigen::Matrix<double, 3, 4> m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = v[static_cast<std::size_t>(r * 4 + c)];
  }
  Pose p = Pose::from_matrix(m);
  if (!p.is_valid(1e-6)) {
    throw Error(ErrorCode::CalibrationInvalid,
                source + ":" + std::to_string(e.line) + ": extrinsic rotation is not orthonormal with det +1");
  }
  if (!p.is_valid(1e-12)) {
    // Snap rounded input onto SO(3).
    Eigen::JacobiSVD<Mat3> svd(p.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
    p.rotation = svd.matrixU() * svd.matrixV().transpose();
  }
  return p;
}

RigCamera camera_from_section(const KeyValueSection& s, const fs::path& base_dir, const std::string& source) {
  static const std::set<std::string, std::less<>> known = {"id", "model", "intrinsics", "fx", "fy", "cx", "cy",
                                                           "skew", "image", "table", "extrinsic"};
  for (const auto& e : s.entries) {
    if (!known.contains(e.key)) parse_fail(source, e.line, "unknown camera field '" + e.key + "'");
  }
  auto require = [&](std::string_view key) -> const KeyValueEntry& {
    const auto* e = s.find(key);
    if (e == nullptr) parse_fail(source, s.line, "camera section lacks field '" + std::string(key) + "'");
    return *e;
  };

  const auto id = parse_integer(require("id"), source);
  const auto& model_entry = require("model");
  const Pose extrinsic = checked_extrinsic(require("extrinsic"), source);

  if (model_entry.value == "pinhole") {
    PinholeIntrinsics k;
    if (const auto* e = s.find("intrinsics")) {
      const auto v = parse_reals(*e, source, 5);
      k = {v[0], v[1], v[2], v[3], v[4]};
    } else {
      k.fx = parse_real(require("fx"), source);
      k.fy = parse_real(require("fy"), source);
      k.cx = parse_real(require("cx"), source);
      k.cy = parse_real(require("cy"), source);
      if (const auto* e = s.find("skew")) k.skew = parse_real(*e, source);
    }
    ImageSize size{2.0 * k.cx, 2.0 * k.cy};
    if (const auto* e = s.find("image")) {
      const auto v = parse_reals(*e, source, 2);
      size = {v[0], v[1]};
    }
    return {static_cast<int>(id), CameraModel::pinhole(k, size), extrinsic};
  }
  if (model_entry.value == "generic") {
    const auto& table = require("table");
    fs::path table_path(table.value);
    if (table_path.is_relative()) table_path = base_dir / table_path;
    return {static_cast<int>(id), CameraModel::generic(load_bearing_table(table_path)), extrinsic};
  }
  parse_fail(source, model_entry.line, "field 'model': expected pinhole or generic, got '" + model_entry.value + "'");
}

void write_camera(std::ostream& out, const RigCamera& cam, const std::string& table_name) {
  out << "[camera]\n";
  out << "id = " << cam.id << "\n";
  if (cam.model.is_pinhole()) {
    const auto& k = cam.model.intrinsics();
    const auto size = cam.model.image_size();
    out << "model = pinhole\n";
    out << "intrinsics = " << format_real(k.fx) << ' ' << format_real(k.fy) << ' ' << format_real(k.cx) << ' '
        << format_real(k.cy) << ' ' << format_real(k.skew) << "\n";
    out << "image = " << format_real(size.width) << ' ' << format_real(size.height) << "\n";
  } else {
    out << "model = generic\n";
    out << "table = " << table_name << "\n";
  }
  out << "extrinsic = " << format_pose_line(cam.extrinsic) << "\n\n";
}

}  // namespace

CameraRig rig_from_sections(std::span<const KeyValueSection> sections, const fs::path& base_dir,
                            const std::string& source) {
  std::vector<RigCamera> cameras;
  for (const auto& s : sections) {
    if (s.name != "camera") parse_fail(source, s.line, "unknown section '" + s.name + "'");
    cameras.push_back(camera_from_section(s, base_dir, source));
  }
  if (cameras.empty()) throw Error(ErrorCode::CalibrationInvalid, source + ": rig defines no cameras");
  return CameraRig(std::move(cameras));
}

CameraRig load_rig(const fs::path& path) {
  auto in = open_in(path);
  const auto sections = parse_key_value(in, path.string());
  const auto& preamble = sections.front();
  if (!preamble.entries.empty()) {
    parse_fail(path.string(), preamble.entries.front().line, "field outside a [camera] section");
  }
  return rig_from_sections(std::span(sections).subspan(1), path.parent_path(), path.string());
}

void save_rig(const CameraRig& rig, const fs::path& path) {
  auto out = open_out(path);
  out << "# camera rig: extrinsic = camera pose in the vehicle frame, row-major [R|t]\n\n";
  for (const auto& cam : rig.cameras()) {
    std::string table_name;
    if (const auto* table = cam.model.table()) {
      table_name = path.stem().string() + "_camera" + std::to_string(cam.id) + ".table";
      save_bearing_table(*table, path.parent_path() / table_name);
    }
    write_camera(out, cam, table_name);
  }
  check_written(out, path);
}

BearingTable load_bearing_table(const fs::path& path) {
  auto in = open_in(path);
  const std::string source = path.string();
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::string_view {
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view v(line);
      if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
      if (v.find_first_not_of(" \t\r") != std::string_view::npos) return v;
    }
    parse_fail(source, line_no, "unexpected end of bearing table");
  };
  auto header = [&](std::string_view key) {
    std::istringstream ss{std::string(next_line())};
    std::string word;
    double a = 0.0;
    double b = 0.0;
    if (!(ss >> word >> a >> b) || word != key) {
      parse_fail(source, line_no, "expected '" + std::string(key) + " <a> <b>'");
    }
    return std::pair{a, b};
  };
  const auto [cols, rows] = header("size");
  const auto [u0, v0] = header("origin");
  const auto [du, dv] = header("step");
  if (cols < 2 || rows < 2 || cols != std::floor(cols) || rows != std::floor(rows)) {
    parse_fail(source, 1, "bearing table size must be integral and >= 2");
  }
  const auto n = static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows);
  std::vector<Vec3> bearings;
  bearings.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto parts = split(next_line(), ' ');
    std::vector<double> xyz;
    for (auto p : parts) {
      if (p.empty()) continue;
      double v = 0.0;
      if (!parse_real(p, v)) parse_fail(source, line_no, "bad real '" + std::string(p) + "'");
      xyz.push_back(v);
    }
    if (xyz.size() != 3) parse_fail(source, line_no, "expected 3 reals per bearing");
    bearings.emplace_back(xyz[0], xyz[1], xyz[2]);
  }
  return BearingTable(static_cast<std::size_t>(cols), static_cast<std::size_t>(rows), u0, v0, du, dv,
                      std::move(bearings));
}

void save_bearing_table(const BearingTable& table, const fs::path& path) {
  auto out = open_out(path);
  out << "size " << table.cols() << ' ' << table.rows() << "\n";
  out << "origin " << format_real(table.origin_u()) << ' ' << format_real(table.origin_v()) << "\n";
  out << "step " << format_real(table.step_u()) << ' ' << format_real(table.step_v()) << "\n";
  for (const auto& b : table.bearings()) {
    out << format_real(b.x()) << ' ' << format_real(b.y()) << ' ' << format_real(b.z()) << "\n";
  }
  check_written(out, path);
}

std::size_t FramePairRecord::size() const {
  std::size_t n = 0;
  for (const auto& [id, m] : matches) n += m.size();
  return n;
}

std::vector<FramePairRecord> load_matches(const fs::path& path) {
  auto in = open_in(path);
  const std::string source = path.string();
  std::string line;
  if (!std::getline(in, line)) parse_fail(source, 1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t0,t1,camera_id,u0,v0,u1,v1") {
    parse_fail(source, 1, "expected header 't0,t1,camera_id,u0,v0,u1,v1'");
  }
  std::vector<FramePairRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 7) parse_fail(source, line_no, "expected 7 comma-separated fields");
    long long t0 = 0;
    long long t1 = 0;
    int cam = 0;
    if (!parse_int(fields[0], t0)) parse_fail(source, line_no, "field 't0': expected an integer");
    if (!parse_int(fields[1], t1)) parse_fail(source, line_no, "field 't1': expected an integer");
    if (!parse_int(fields[2], cam)) parse_fail(source, line_no, "field 'camera_id': expected an integer");
    std::array<double, 4> px{};
    static constexpr std::array<const char*, 4> names = {"u0", "v0", "u1", "v1"};
    for (std::size_t k = 0; k < 4; ++k) {
      if (!parse_real(fields[k + 3], px[k])) {
        parse_fail(source, line_no, std::string("field '") + names[k] + "': expected a real");
      }
    }
    if (records.empty() || records.back().t0 != t0 || records.back().t1 != t1) {
      if (t1 <= t0) {
        throw Error(ErrorCode::NonMonotoneFrames, source + ":" + std::to_string(line_no) + ": t1 must exceed t0");
      }
      if (!records.empty() && t0 <= records.back().t0) {
        throw Error(ErrorCode::NonMonotoneFrames,
                    source + ":" + std::to_string(line_no) + ": frame pair does not follow the previous one");
      }
      records.push_back({t0, t1, {}});
    }
    records.back().matches[cam].push_back({{px[0], px[1]}, {px[2], px[3]}});
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read failure on " + source);
  return records;
}

void save_matches(std::span<const FramePairRecord> records, const fs::path& path) {
  auto out = open_out(path);
  out << "t0,t1,camera_id,u0,v0,u1,v1\n";
  for (const auto& r : records) {
    for (const auto& [cam, list] : r.matches) {
      for (const auto& m : list) {
        out << r.t0 << ',' << r.t1 << ',' << cam << ',' << format_real(m.p0.u) << ',' << format_real(m.p0.v) << ','
            << format_real(m.p1.u) << ',' << format_real(m.p1.v) << '\n';
      }
    }
  }
  check_written(out, path);
}

std::vector<MatchSet> to_match_sets(const FramePairRecord& record, const CameraRig& rig) {
  std::vector<MatchSet> sets;
  for (const auto& [cam_id, list] : record.matches) {
    const auto& cam = rig.camera(cam_id);
    MatchSet set;
    set.camera_id = cam_id;
    set.matches.reserve(list.size());
    for (const auto& m : list) {
      if (!cam.model.is_pinhole() && (!cam.model.contains(m.p0) || !cam.model.contains(m.p1))) continue;
      set.matches.push_back(FeatureMatch::from_pixels(cam.model, m.p0, m.p1));
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

FramePairRecord to_record(long long t0, long long t1, std::span<const MatchSet> sets) {
  FramePairRecord r{t0, t1, {}};
  for (const auto& s : sets) {
    auto& list = r.matches[s.camera_id];
    for (const auto& m : s.matches) list.push_back({m.pixel_t0, m.pixel_t1});
  }
  return r;
}

std::string format_pose_line(const Pose& pose) {
  std::string line;
  const auto m = pose.matrix();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (!line.empty()) line += ' ';
      line += format_real(m(r, c));
    }
  }
  return line;
}

void write_trajectory(const Trajectory& t, const fs::path& path) {
  auto out = open_out(path);
  for (const auto& p : t.poses) out << format_pose_line(p) << '\n';
  check_written(out, path);
}

Trajectory read_trajectory(const fs::path& path) {
  auto in = open_in(path);
  Trajectory t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    std::string token;
    std::vector<double> v;
    while (ss >> token) {
      double x = 0.0;
      if (!parse_real(token, x)) parse_fail(path.string(), line_no, "bad real '" + token + "'");
      v.push_back(x);
    }
    if (v.size() != 12) parse_fail(path.string(), line_no, "expected 12 reals per pose");
    Eigen::Matrix<double, 3, 4> m;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) m(r, c) = v[static_cast<std::size_t>(r * 4 + c)];
    }
    t.poses.push_back(Pose::from_matrix(m));
  }
  return t;
}

std::vector<double> load_reals(const fs::path& path) {
  auto in = open_in(path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    double v = 0.0;
    if (!parse_real(line, v)) parse_fail(path.string(), line_no, "expected one real per line");
    values.push_back(v);
  }
  return values;
}

void save_reals(std::span<const double> values, const fs::path& path) {
  auto out = open_out(path);
  for (double v : values) out << format_real(v) << '\n';
  check_written(out, path);
}

Scenario load_scenario(const fs::path& path) {
  auto in = open_in(path);
  const std::string source = path.string();
  const auto sections = parse_key_value(in, source);
  const auto& top = sections.front();

  SceneSpec scene;
  NoiseSpec noise;
  MotionParams truth;
  std::vector<SequenceSegment> sequence;
  double speed = 1.0;
  double frame_interval = 0.1;
  std::uint64_t seed = 0;
  std::optional<fs::path> rig_path;

  for (const auto& e : top.entries) {
    const auto& k = e.key;
    if (k == "seed") {
      seed = static_cast<std::uint64_t>(parse_integer(e, source));
    } else if (k == "scene.num_points") {
      const auto n = parse_integer(e, source);
      if (n < 1) parse_fail(source, e.line, "field 'scene.num_points': must be >= 1");
      scene.num_points = static_cast<std::size_t>(n);
    } else if (k == "scene.depth_min") {
      scene.depth_min = parse_real(e, source);
    } else if (k == "scene.depth_max") {
      scene.depth_max = parse_real(e, source);
    } else if (k == "scene.lateral_spread") {
      scene.lateral_spread = parse_real(e, source);
    } else if (k == "scene.vertical_spread") {
      scene.vertical_spread = parse_real(e, source);
    } else if (k == "scene.layout") {
      if (e.value == "forward") {
        scene.layout = SceneLayout::Forward;
      } else if (e.value == "surround") {
        scene.layout = SceneLayout::Surround;
      } else {
        parse_fail(source, e.line, "field 'scene.layout': expected forward or surround");
      }
    } else if (k == "noise.pixel_sigma") {
      noise.pixel_sigma = parse_real(e, source);
    } else if (k == "noise.outlier_fraction") {
      noise.outlier_fraction = parse_real(e, source);
    } else if (k == "noise.outlier_mode") {
      if (e.value == "uniform_image") {
        noise.outlier_mode = OutlierMode::UniformImage;
      } else if (e.value == "wrong_association") {
        noise.outlier_mode = OutlierMode::WrongAssociation;
      } else {
        parse_fail(source, e.line, "field 'noise.outlier_mode': expected uniform_image or wrong_association");
      }
    } else if (k == "truth.yaw") {
      truth.yaw = parse_real(e, source);
    } else if (k == "truth.arc_length") {
      truth.arc_length = parse_real(e, source);
    } else if (k == "truth.pitch") {
      truth.pitch = parse_real(e, source);
    } else if (k == "truth.roll") {
      truth.roll = parse_real(e, source);
    } else if (k == "sequence") {
      std::istringstream ss(e.value);
      std::string token;
      while (ss >> token) {
        const auto parts = split(token, ':');
        SequenceSegment seg;
        const bool straight = parts[0] == "straight" && parts.size() == 2;
        const bool curve = parts[0] == "curve" && parts.size() == 3;
        if ((!straight && !curve) || !parse_int(parts[1], seg.frames) || seg.frames == 0 ||
            (curve && !parse_real(parts[2], seg.total_yaw))) {
          parse_fail(source, e.line, "field 'sequence': bad segment '" + token +
                                         "' (expected straight:<frames> or curve:<frames>:<total_yaw>)");
        }
        sequence.push_back(seg);
      }
    } else if (k == "sequence.speed") {
      speed = parse_real(e, source);
    } else if (k == "sequence.frame_interval") {
      frame_interval = parse_real(e, source);
    } else if (k == "rig") {
      rig_path = fs::path(e.value);
      if (rig_path->is_relative()) rig_path = path.parent_path() / *rig_path;
    } else {
      parse_fail(source, e.line, "unknown scenario field '" + k + "'");
    }
  }

  const auto camera_sections = std::span(sections).subspan(1);
  if (rig_path && !camera_sections.empty()) {
    parse_fail(source, camera_sections.front().line, "scenario has both 'rig' and inline [camera] sections");
  }
  CameraRig rig = rig_path ? load_rig(*rig_path) : rig_from_sections(camera_sections, path.parent_path(), source);

  try {
    scene.validate();
    noise.validate();
    truth.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, source + ": " + e.what());
  }
  return Scenario{scene, noise, std::move(rig), truth, std::move(sequence), speed, frame_interval, seed};
}

}  // namespace momo
