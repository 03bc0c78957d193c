#include "teleposture/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "embedded_data.hpp"
#include "teleposture/errors.hpp"
#include "teleposture/rotation.hpp"

namespace teleposture {

namespace {

constexpr const char* kModule = "io";
constexpr double kQuatRenormLimit = 1e-3;
constexpr double kQuatSilentTol = 1e-6;

const std::vector<std::string> kTrajectoryColumns = {"t",  "px", "py", "pz", "qw", "qx", "qy",
                                                     "qz", "vx", "vy", "vz", "wx", "wy", "wz"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line, const std::string& column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw ParseError(kModule, "column '" + column + "': cannot parse '" + cell + "' as a number", line);
  }
  if (!std::isfinite(v)) throw ParseError(kModule, "column '" + column + "': non-finite value", line);
  return v;
}

/// Line-oriented reader that tracks line numbers and consumes '#' metadata.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  /// Next data (non-comment, non-empty) line split into cells.
  bool next(std::vector<std::string>& cells) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const std::string t = trim(line);
      if (t.empty()) continue;
      if (t[0] == '#') {
        read_meta(t);
        continue;
      }
      cells = split_csv(t);
      return true;
    }
    return false;
  }

  std::size_t line() const { return line_no_; }
  const std::vector<std::pair<std::string, std::string>>& meta() const { return meta_; }

 private:
  void read_meta(const std::string& t) {
    const auto colon = t.find(':');
    if (colon == std::string::npos) return;
    std::string key = trim(std::string_view(t).substr(1, colon - 1));
    std::string value = trim(std::string_view(t).substr(colon + 1));
    if (key == "format_version" && value != std::to_string(kFormatVersion)) {
      throw ParseError(kModule, "unsupported format_version '" + value + "'", line_no_);
    }
    meta_.emplace_back(std::move(key), std::move(value));
  }

  std::istream& in_;
  std::size_t line_no_ = 0;
  std::vector<std::pair<std::string, std::string>> meta_;
};

void expect_header(const std::vector<std::string>& got, const std::vector<std::string>& want,
                   std::size_t line) {
  if (got != want) {
    std::string joined;
    for (const auto& w : want) joined += (joined.empty() ? "" : ",") + w;
    throw ParseError(kModule, "expected header '" + joined + "'", line);
  }
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(kModule, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::string version_line() { return "# format_version: " + std::to_string(kFormatVersion) + "\n"; }

void append_row(std::string& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out += ',';
    out += format_double(v);
    first = false;
  }
  out += '\n';
}

void check_increasing(const std::vector<double>& t, std::size_t line) {
  const std::size_t k = t.size() - 1;
  if (k > 0 && !(t[k] > t[k - 1])) {
    throw OrderingError(kModule, k,
                        "timestamp " + format_double(t[k]) + " does not increase (line " +
                            std::to_string(line) + ")");
  }
}

// ---- json helpers -----------------------------------------------------------

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                    const std::string& what) {
  if (!j.is_object()) throw ConfigError(kModule, what + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(kModule, what + ": unknown key '" + key + "'");
  }
}

template <int N>
Eigen::Matrix<double, N, 1> json_vector(const nlohmann::json& j, const std::string& key) {
  Eigen::Matrix<double, N, 1> v;
  if (j.is_number()) {
    v.setConstant(j.get<double>());
    return v;
  }
  const auto values = j.get<std::vector<double>>();
  if (values.size() != static_cast<std::size_t>(N)) {
    throw ConfigError(kModule, key + ": expected " + std::to_string(N) + " values");
  }
  for (int i = 0; i < N; ++i) v[i] = values[static_cast<std::size_t>(i)];
  return v;
}

template <typename Derived>
nlohmann::json json_array(const Eigen::MatrixBase<Derived>& v) {
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v[i];
  return out;
}

void check_version(const nlohmann::json& j, const std::string& what) {
  if (j.contains("format_version") && j.at("format_version").get<int>() != kFormatVersion) {
    throw ConfigError(kModule, what + ": unsupported format_version");
  }
}

template <typename F>
auto wrap_json(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(kModule, what + ": " + e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw InputError(kModule, "cannot format number");
  return std::string(buf, ptr);
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(kModule, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(kModule, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw InputError(kModule, "failed writing '" + path.string() + "'");
}

// ---- models -----------------------------------------------------------------

HumanModel model_from_json(const nlohmann::json& j) {
  return wrap_json("model", [&] {
    reject_unknown(j, {"format_version", "description", "segment_lengths", "joint_limits",
                       "neutral_posture", "base_pose"},
                   "model");
    check_version(j, "model");
    const auto& sl = j.at("segment_lengths");
    reject_unknown(sl, {"torso_len", "shoulder_offset", "upper_arm_len", "forearm_len", "hand_len"},
                   "segment_lengths");
    SegmentLengths lengths;
    lengths.torso_len = sl.at("torso_len").get<double>();
    lengths.shoulder_offset = sl.at("shoulder_offset").get<double>();
    lengths.upper_arm_len = sl.at("upper_arm_len").get<double>();
    lengths.forearm_len = sl.at("forearm_len").get<double>();
    lengths.hand_len = sl.at("hand_len").get<double>();

    JointVector lo, hi, neutral;
    const auto& limits = j.at("joint_limits");
    const auto& np = j.at("neutral_posture");
    const std::set<std::string> names(joint_names().begin(), joint_names().end());
    reject_unknown(limits, names, "joint_limits");
    reject_unknown(np, names, "neutral_posture");
    for (int i = 0; i < kNumJoints; ++i) {
      const std::string& name = joint_names()[static_cast<std::size_t>(i)];
      const auto range = limits.at(name).get<std::vector<double>>();
      if (range.size() != 2) throw ConfigError(kModule, "joint_limits." + name + ": expected [lo, hi]");
      lo[i] = range[0];
      hi[i] = range[1];
      neutral[i] = np.at(name).get<double>();
    }

    TaskSpacePose base;
    const auto& bp = j.at("base_pose");
    reject_unknown(bp, {"position", "orientation"}, "base_pose");
    base.position = json_vector<3>(bp.at("position"), "base_pose.position");
    const Eigen::Vector4d wxyz = json_vector<4>(bp.at("orientation"), "base_pose.orientation");
    if (std::abs(wxyz.norm() - 1.0) > kQuatRenormLimit) {
      throw ConfigError(kModule, "base_pose.orientation is not a unit quaternion");
    }
    base.orientation = Eigen::Quaterniond(wxyz[0], wxyz[1], wxyz[2], wxyz[3]).normalized();
    return HumanModel(lengths, lo, hi, neutral, base);
  });
}

namespace {

nlohmann::ordered_json ordered_model_json(const HumanModel& model) {
  nlohmann::ordered_json j;
  j["format_version"] = kFormatVersion;
  const SegmentLengths& l = model.lengths();
  j["segment_lengths"] = {{"torso_len", l.torso_len},
                          {"shoulder_offset", l.shoulder_offset},
                          {"upper_arm_len", l.upper_arm_len},
                          {"forearm_len", l.forearm_len},
                          {"hand_len", l.hand_len}};
  nlohmann::ordered_json limits, neutral;
  for (int i = 0; i < kNumJoints; ++i) {
    const std::string& name = joint_names()[static_cast<std::size_t>(i)];
    limits[name] = {model.limits_lo()[i], model.limits_hi()[i]};
    neutral[name] = model.neutral_posture()[i];
  }
  j["joint_limits"] = limits;
  j["neutral_posture"] = neutral;
  const auto& q = model.base_pose().orientation;
  j["base_pose"] = {{"position", json_array(model.base_pose().position)},
                    {"orientation", {q.w(), q.x(), q.y(), q.z()}}};
  return j;
}

}  // namespace

nlohmann::json model_to_json(const HumanModel& model) {
  return nlohmann::json::parse(ordered_model_json(model).dump());
}

HumanModel bundled_default_model() {
  return model_from_json(nlohmann::json::parse(embedded::kDefaultModelJson));
}

HumanModel read_model(const std::filesystem::path& path) { return model_from_json(read_json_file(path)); }

void write_model(const std::filesystem::path& path, const HumanModel& model) {
  write_text_file(path, ordered_model_json(model).dump(2) + "\n");
}

// ---- stylus trajectories ----------------------------------------------------

std::vector<StylusObservation> parse_trajectory(std::istream& in, Warnings* warnings) {
  CsvReader reader(in);
  std::vector<std::string> cells;
  if (!reader.next(cells)) throw ParseError(kModule, "empty trajectory file", reader.line());
  const std::vector<std::string> pose_cols(kTrajectoryColumns.begin(), kTrajectoryColumns.begin() + 8);
  const bool pose_only = cells == pose_cols;
  if (!pose_only) expect_header(cells, kTrajectoryColumns, reader.line());
  const std::vector<std::string>& columns = pose_only ? pose_cols : kTrajectoryColumns;

  std::vector<StylusObservation> out;
  std::vector<double> times;
  while (reader.next(cells)) {
    const std::size_t line = reader.line();
    if (cells.size() != columns.size()) {
      throw ParseError(kModule,
                       "expected " + std::to_string(columns.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       line);
    }
    double v[14];
    for (std::size_t c = 0; c < columns.size(); ++c) v[c] = parse_cell(cells[c], line, columns[c]);
    StylusObservation obs;
    obs.t = v[0];
    obs.pose.position = Eigen::Vector3d(v[1], v[2], v[3]);
    Eigen::Quaterniond q(v[4], v[5], v[6], v[7]);
    const double drift = std::abs(q.norm() - 1.0);
    if (drift > kQuatRenormLimit) {
      throw ParseError(kModule, "quaternion norm " + format_double(q.norm()) + " is not unit", line);
    }
    if (drift > kQuatSilentTol) {
      if (warnings) warnings->push_back("line " + std::to_string(line) + ": quaternion renormalized");
      q.normalize();
    }
    obs.pose.orientation = q;
    if (!pose_only) {
      obs.velocity.linear = Eigen::Vector3d(v[8], v[9], v[10]);
      obs.velocity.angular = Eigen::Vector3d(v[11], v[12], v[13]);
    }
    times.push_back(obs.t);
    check_increasing(times, line);
    out.push_back(obs);
  }
  if (out.empty()) throw ParseError(kModule, "trajectory has no samples", reader.line());
  if (pose_only) {
    std::vector<std::pair<double, TaskSpacePose>> poses;
    poses.reserve(out.size());
    for (const auto& o : out) poses.emplace_back(o.t, o.pose);
    return velocity_from_poses(poses);
  }
  return out;
}

std::vector<StylusObservation> read_trajectory(const std::filesystem::path& path, Warnings* warnings) {
  auto in = open_in(path);
  return parse_trajectory(in, warnings);
}

std::string format_trajectory(const std::vector<StylusObservation>& traj) {
  std::string out = version_line();
  for (std::size_t c = 0; c < kTrajectoryColumns.size(); ++c) {
    out += (c ? "," : "") + kTrajectoryColumns[c];
  }
  out += '\n';
  for (const auto& o : traj) {
    const auto& p = o.pose.position;
    const auto& q = o.pose.orientation;
    const auto& v = o.velocity.linear;
    const auto& w = o.velocity.angular;
    append_row(out, {o.t, p.x(), p.y(), p.z(), q.w(), q.x(), q.y(), q.z(), v.x(), v.y(), v.z(),
                     w.x(), w.y(), w.z()});
  }
  return out;
}

void write_trajectory(const std::filesystem::path& path, const std::vector<StylusObservation>& traj) {
  write_text_file(path, format_trajectory(traj));
}

std::vector<StylusObservation> velocity_from_poses(
    const std::vector<std::pair<double, TaskSpacePose>>& poses) {
  if (poses.size() < 2) throw InputError(kModule, "velocity_from_poses needs at least 2 samples");
  std::vector<StylusObservation> out(poses.size());
  const std::size_t n = poses.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0 && !(poses[k].first > poses[k - 1].first)) {
      throw OrderingError(kModule, k, "timestamps must strictly increase");
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t a = k == 0 ? 0 : k - 1;
    const std::size_t b = k + 1 == n ? k : k + 1;
    const double dt = poses[b].first - poses[a].first;
    out[k].t = poses[k].first;
    out[k].pose = poses[k].second;
    out[k].velocity.linear = (poses[b].second.position - poses[a].second.position) / dt;
    out[k].velocity.angular =
        rotation_difference(poses[b].second.orientation, poses[a].second.orientation) / dt;
  }
  return out;
}

// ---- posture trajectories ---------------------------------------------------

namespace {

std::vector<std::string> posture_columns() {
  std::vector<std::string> cols{"t"};
  for (const auto& n : joint_names()) cols.push_back(n);
  for (const auto& n : joint_names()) cols.push_back(n + "_vel");
  return cols;
}

}  // namespace

PostureTrajectory parse_postures(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> cells;
  if (!reader.next(cells)) throw ParseError(kModule, "empty posture file", reader.line());
  const auto columns = posture_columns();
  expect_header(cells, columns, reader.line());
  PostureTrajectory out;
  while (reader.next(cells)) {
    const std::size_t line = reader.line();
    if (cells.size() != columns.size()) {
      throw ParseError(kModule,
                       "expected " + std::to_string(columns.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       line);
    }
    PostureState s;
    out.t.push_back(parse_cell(cells[0], line, columns[0]));
    for (int i = 0; i < kNumJoints; ++i) {
      const auto c = static_cast<std::size_t>(i);
      s.q[i] = parse_cell(cells[1 + c], line, columns[1 + c]);
      s.qdot[i] = parse_cell(cells[1 + kNumJoints + c], line, columns[1 + kNumJoints + c]);
    }
    check_increasing(out.t, line);
    out.states.push_back(s);
  }
  return out;
}

PostureTrajectory read_postures(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_postures(in);
}

std::string format_postures(const PostureTrajectory& traj) {
  if (traj.t.size() != traj.states.size()) throw InputError(kModule, "time and state counts differ");
  std::string out = version_line();
  const auto columns = posture_columns();
  for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
  out += '\n';
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    out += format_double(traj.t[k]);
    for (int i = 0; i < kNumJoints; ++i) out += ',' + format_double(traj.states[k].q[i]);
    for (int i = 0; i < kNumJoints; ++i) out += ',' + format_double(traj.states[k].qdot[i]);
    out += '\n';
  }
  return out;
}

void write_postures(const std::filesystem::path& path, const PostureTrajectory& traj) {
  write_text_file(path, format_postures(traj));
}

// ---- estimates --------------------------------------------------------------

namespace {

nlohmann::ordered_json ordered_estimate_json(const EstimateRecord& rec) {
  nlohmann::ordered_json j;
  const PostureEstimate& e = rec.estimate;
  j["format_version"] = kFormatVersion;
  j["t"] = e.timestamp;
  j["mean_q"] = json_array(e.mean_q);
  j["std_q"] = json_array(e.std_q);
  j["map_q"] = json_array(e.map_state.q);
  j["map_qdot"] = json_array(e.map_state.qdot);
  j["ess"] = e.ess;
  j["resampled"] = e.resampled;
  if (rec.rula) {
    nlohmann::ordered_json r;
    r["expected"] = rec.rula->expected;
    r["std"] = rec.rula->std;
    r["histogram"] = std::vector<double>(rec.rula->histogram.begin(), rec.rula->histogram.end());
    if (rec.map_grand) r["map_grand"] = *rec.map_grand;
    j["rula"] = r;
  }
  return j;
}

}  // namespace

nlohmann::json estimate_to_json(const EstimateRecord& rec) {
  return nlohmann::json::parse(ordered_estimate_json(rec).dump());
}

EstimateRecord estimate_from_json(const nlohmann::json& j) {
  return wrap_json("estimate", [&] {
    reject_unknown(j, {"format_version", "t", "mean_q", "std_q", "map_q", "map_qdot", "ess",
                       "resampled", "rula"},
                   "estimate");
    check_version(j, "estimate");
    EstimateRecord rec;
    PostureEstimate& e = rec.estimate;
    e.timestamp = j.at("t").get<double>();
    e.mean_q = json_vector<kNumJoints>(j.at("mean_q"), "mean_q");
    e.std_q = json_vector<kNumJoints>(j.at("std_q"), "std_q");
    e.map_state.q = json_vector<kNumJoints>(j.at("map_q"), "map_q");
    e.map_state.qdot = json_vector<kNumJoints>(j.at("map_qdot"), "map_qdot");
    e.ess = j.at("ess").get<double>();
    e.resampled = j.at("resampled").get<bool>();
    if (j.contains("rula")) {
      const auto& r = j.at("rula");
      reject_unknown(r, {"expected", "std", "histogram", "map_grand"}, "estimate.rula");
      RulaDistribution d;
      d.expected = r.at("expected").get<double>();
      d.std = r.at("std").get<double>();
      const Eigen::Matrix<double, 7, 1> h = json_vector<7>(r.at("histogram"), "histogram");
      for (int i = 0; i < 7; ++i) d.histogram[static_cast<std::size_t>(i)] = h[i];
      rec.rula = d;
      if (r.contains("map_grand")) rec.map_grand = r.at("map_grand").get<int>();
    }
    return rec;
  });
}

std::vector<EstimateRecord> parse_estimates(std::istream& in) {
  std::vector<EstimateRecord> out;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> times;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      out.push_back(estimate_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(kModule, e.what(), line_no);
    } catch (const ConfigError& e) {
      throw ParseError(kModule, e.what(), line_no);
    }
    times.push_back(out.back().estimate.timestamp);
    check_increasing(times, line_no);
  }
  if (out.empty()) throw ParseError(kModule, "estimate file has no records", line_no);
  return out;
}

std::vector<EstimateRecord> read_estimates(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_estimates(in);
}

std::string format_estimates(const std::vector<EstimateRecord>& records) {
  std::string out;
  for (const auto& r : records) out += ordered_estimate_json(r).dump() + "\n";
  return out;
}

void write_estimates(const std::filesystem::path& path, const std::vector<EstimateRecord>& records) {
  write_text_file(path, format_estimates(records));
}

PostureTrajectory estimates_to_postures(const std::vector<EstimateRecord>& records) {
  PostureTrajectory out;
  for (const auto& r : records) {
    out.t.push_back(r.estimate.timestamp);
    out.states.push_back(r.estimate.map_state);
  }
  return out;
}

// ---- calibration ------------------------------------------------------------

CalibrationRecording parse_calibration(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> cells;
  if (!reader.next(cells)) throw ParseError(kModule, "empty calibration file", reader.line());
  const std::vector<std::string> columns = {"t", "x", "y", "z"};
  expect_header(cells, columns, reader.line());
  std::optional<CalibrationRoutine> routine;
  for (const auto& [key, value] : reader.meta()) {
    if (key == "routine") routine = parse_routine(value);
  }
  if (!routine) throw ParseError(kModule, "missing '# routine: <name>' line", reader.line());
  CalibrationRecording rec;
  rec.routine = *routine;
  std::vector<double> times;
  while (reader.next(cells)) {
    const std::size_t line = reader.line();
    if (cells.size() != 4) {
      throw ParseError(kModule, "expected 4 cells, found " + std::to_string(cells.size()), line);
    }
    CalibrationSample s;
    s.t = parse_cell(cells[0], line, "t");
    s.position = Eigen::Vector3d(parse_cell(cells[1], line, "x"), parse_cell(cells[2], line, "y"),
                                 parse_cell(cells[3], line, "z"));
    times.push_back(s.t);
    check_increasing(times, line);
    rec.samples.push_back(s);
  }
  return rec;
}

CalibrationRecording read_calibration(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_calibration(in);
}

std::string format_calibration(const CalibrationRecording& rec) {
  std::string out = version_line();
  out += "# routine: " + routine_name(rec.routine) + "\n";
  out += "t,x,y,z\n";
  for (const auto& s : rec.samples) append_row(out, {s.t, s.position.x(), s.position.y(), s.position.z()});
  return out;
}

void write_calibration(const std::filesystem::path& path, const CalibrationRecording& rec) {
  write_text_file(path, format_calibration(rec));
}

// ---- configuration ----------------------------------------------------------

FilterConfig filter_config_from_json(const nlohmann::json& j, FilterConfig base) {
  return wrap_json("filter config", [&] {
    reject_unknown(j, {"format_version", "particles", "sigma0_scale", "accel_rate",
                       "obs_noise_variances", "resample_threshold", "seed", "init",
                       "validity_margin", "reinject_fraction"},
                   "filter config");
    check_version(j, "filter config");
    if (j.contains("particles")) base.particles = j.at("particles").get<int>();
    if (j.contains("sigma0_scale")) base.sigma0_scale = j.at("sigma0_scale").get<double>();
    if (j.contains("accel_rate")) base.accel_rate = json_vector<kNumJoints>(j.at("accel_rate"), "accel_rate");
    if (j.contains("obs_noise_variances")) {
      base.obs_noise = ObservationNoise(json_vector<12>(j.at("obs_noise_variances"), "obs_noise_variances"));
    }
    if (j.contains("resample_threshold")) base.resample_threshold = j.at("resample_threshold").get<double>();
    if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("init")) {
      const auto mode = j.at("init").get<std::string>();
      if (mode == "neutral") base.init = InitMode::kNeutral;
      else if (mode == "uniform") base.init = InitMode::kUniform;
      else throw ConfigError(kModule, "filter config: init must be 'neutral' or 'uniform'");
    }
    if (j.contains("validity_margin")) base.validity_margin = j.at("validity_margin").get<double>();
    if (j.contains("reinject_fraction")) base.reinject_fraction = j.at("reinject_fraction").get<double>();
    base.validate();
    return base;
  });
}

nlohmann::json filter_config_to_json(const FilterConfig& cfg) {
  return {{"format_version", kFormatVersion},
          {"particles", cfg.particles},
          {"sigma0_scale", cfg.sigma0_scale},
          {"accel_rate", json_array(cfg.accel_rate)},
          {"obs_noise_variances", json_array(cfg.obs_noise.variances())},
          {"resample_threshold", cfg.resample_threshold},
          {"seed", cfg.seed},
          {"init", cfg.init == InitMode::kNeutral ? "neutral" : "uniform"},
          {"validity_margin", cfg.validity_margin},
          {"reinject_fraction", cfg.reinject_fraction}};
}

IkConfig ik_config_from_json(const nlohmann::json& j, IkConfig base) {
  return wrap_json("ik config", [&] {
    reject_unknown(j, {"format_version", "sigma1", "accel_rate", "prior_scale", "max_iters", "tol",
                       "restarts", "restart_scale", "seed", "initial_radius", "comfort_scale",
                       "dense"},
                   "ik config");
    check_version(j, "ik config");
    if (j.contains("sigma1")) base.sigma1 = json_vector<12>(j.at("sigma1"), "sigma1");
    if (j.contains("accel_rate")) base.accel_rate = json_vector<kNumJoints>(j.at("accel_rate"), "accel_rate");
    if (j.contains("prior_scale")) base.prior_scale = j.at("prior_scale").get<double>();
    if (j.contains("max_iters")) base.max_iters = j.at("max_iters").get<int>();
    if (j.contains("tol")) base.tol = j.at("tol").get<double>();
    if (j.contains("restarts")) base.restarts = j.at("restarts").get<int>();
    if (j.contains("restart_scale")) base.restart_scale = j.at("restart_scale").get<double>();
    if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("initial_radius")) base.initial_radius = j.at("initial_radius").get<double>();
    if (j.contains("comfort_scale")) base.comfort_scale = j.at("comfort_scale").get<double>();
    if (j.contains("dense")) base.dense = j.at("dense").get<bool>();
    base.validate();
    return base;
  });
}

nlohmann::json ik_config_to_json(const IkConfig& cfg) {
  return {{"format_version", kFormatVersion},
          {"sigma1", json_array(cfg.sigma1)},
          {"accel_rate", json_array(cfg.accel_rate)},
          {"prior_scale", cfg.prior_scale},
          {"max_iters", cfg.max_iters},
          {"tol", cfg.tol},
          {"restarts", cfg.restarts},
          {"restart_scale", cfg.restart_scale},
          {"seed", cfg.seed},
          {"initial_radius", cfg.initial_radius},
          {"comfort_scale", cfg.comfort_scale},
          {"dense", cfg.dense}};
}

RulaAssumptions rula_assumptions_from_json(const nlohmann::json& j, RulaAssumptions base) {
  return wrap_json("rula assumptions", [&] {
    reject_unknown(j, {"format_version", "seated", "load_kg", "muscle_use_high_freq", "neck_twisted",
                       "trunk_vertical_override", "legs_supported"},
                   "rula assumptions");
    check_version(j, "rula assumptions");
    if (j.contains("seated")) base.seated = j.at("seated").get<bool>();
    if (j.contains("load_kg")) base.load_kg = j.at("load_kg").get<double>();
    if (j.contains("muscle_use_high_freq")) base.muscle_use_high_freq = j.at("muscle_use_high_freq").get<bool>();
    if (j.contains("neck_twisted")) base.neck_twisted = j.at("neck_twisted").get<bool>();
    if (j.contains("trunk_vertical_override")) {
      base.trunk_vertical_override = j.at("trunk_vertical_override").get<bool>();
    }
    if (j.contains("legs_supported")) base.legs_supported = j.at("legs_supported").get<bool>();
    if (!(base.load_kg >= 0.0) || !std::isfinite(base.load_kg)) {
      throw ConfigError(kModule, "rula assumptions: load_kg must be >= 0");
    }
    return base;
  });
}

nlohmann::json rula_assumptions_to_json(const RulaAssumptions& a) {
  return {{"format_version", kFormatVersion},
          {"seated", a.seated},
          {"load_kg", a.load_kg},
          {"muscle_use_high_freq", a.muscle_use_high_freq},
          {"neck_twisted", a.neck_twisted},
          {"trunk_vertical_override", a.trunk_vertical_override},
          {"legs_supported", a.legs_supported}};
}

}  // namespace teleposture
