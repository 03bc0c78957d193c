// teleposture: command-line front end for synthesis, calibration, posture
// estimation, baseline IK, RULA scoring and trajectory comparison.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "teleposture/calib.hpp"
#include "teleposture/compare.hpp"
#include "teleposture/errors.hpp"
#include "teleposture/filter.hpp"
#include "teleposture/ik.hpp"
#include "teleposture/io.hpp"
#include "teleposture/rula.hpp"
#include "teleposture/synth.hpp"

namespace fs = std::filesystem;
using namespace teleposture;

namespace {

constexpr int kExitPipeline = 1;
constexpr int kExitUsage = 2;

HumanModel load_model(const std::string& path) {
  return path.empty() ? HumanModel::default_model() : read_model(path);
}

RulaAssumptions load_assumptions(const std::string& path) {
  return path.empty() ? RulaAssumptions{} : rula_assumptions_from_json(read_json_file(path));
}

void print_warnings(const Warnings& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

bool is_estimate_file(const fs::path& path) { return path.extension() == ".jsonl"; }

PostureTrajectory load_postures_any(const fs::path& path) {
  return is_estimate_file(path) ? estimates_to_postures(read_estimates(path)) : read_postures(path);
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  std::string task = "circle";
  double duration = 30.0;
  double rate = 50.0;
  std::uint64_t seed = 0;
  double pos_noise = 0.002;
  double ori_noise = 0.01;
  double lin_noise = 0.01;
  double ang_noise = 0.05;
  std::string model;
  std::string observations;
  std::string truth;
  std::string clean;
  std::string calibration_dir;
  double arc_deg = 60.0;
  double calib_noise = 0.0;
};

void run_synth(const SynthArgs& a) {
  const HumanModel model = load_model(a.model);
  if (!a.calibration_dir.empty()) {
    fs::create_directories(a.calibration_dir);
    std::uint64_t offset = 0;
    for (CalibrationRoutine r : kAllRoutines) {
      const auto rec = generate_calibration(model, r, a.arc_deg, a.calib_noise, a.seed + offset++);
      const fs::path out = fs::path(a.calibration_dir) / (routine_name(r) + ".csv");
      write_calibration(out, rec);
      std::cout << "wrote " << out.string() << '\n';
    }
  }
  if (a.observations.empty() && a.truth.empty() && a.clean.empty()) return;

  SyntheticTask task;
  task.kind = parse_task(a.task);
  task.duration = a.duration;
  task.rate = a.rate;
  task.seed = a.seed;
  task.noise_variance = noise_variances(a.pos_noise, a.ori_noise, a.lin_noise, a.ang_noise);
  const SyntheticData data = generate_task(model, task);
  if (!a.observations.empty()) write_trajectory(a.observations, data.observations);
  if (!a.clean.empty()) write_trajectory(a.clean, data.clean);
  if (!a.truth.empty()) {
    PostureTrajectory truth;
    for (const auto& o : data.clean) truth.t.push_back(o.t);
    truth.states = data.truth;
    write_postures(a.truth, truth);
  }
  std::cout << "generated " << data.observations.size() << " samples of task " << a.task
            << " (max tracking error " << data.max_tracking_error << " m)\n";
}

// ---- calibrate --------------------------------------------------------------

struct CalibrateArgs {
  std::vector<std::string> recordings;
  std::string model;
  std::string out;
  std::string report;
  double min_arc_deg = 20.0;
  double max_rms = 0.01;
};

void run_calibrate(const CalibrateArgs& a) {
  const HumanModel base = load_model(a.model);
  CalibrationOptions opts;
  opts.min_arc_span = a.min_arc_deg * std::numbers::pi / 180.0;
  opts.max_rms_residual = a.max_rms;
  std::vector<CalibrationRecording> recs;
  for (const auto& path : a.recordings) recs.push_back(read_calibration(path));
  const SegmentLengths lengths = estimate_segment_lengths(recs, base, opts);
  write_model(a.out, base.with_lengths(lengths));

  nlohmann::ordered_json report;
  report["format_version"] = kFormatVersion;
  report["segment_lengths"] = {{"torso_len", lengths.torso_len},
                               {"shoulder_offset", lengths.shoulder_offset},
                               {"upper_arm_len", lengths.upper_arm_len},
                               {"forearm_len", lengths.forearm_len},
                               {"hand_len", lengths.hand_len}};
  for (const auto& rec : recs) {
    const CircleFit fit = fit_recording(rec, opts);
    nlohmann::ordered_json f;
    f["radius"] = fit.radius;
    f["rms_residual"] = fit.rms_residual;
    f["arc_span_rad"] = fit.arc_span;
    f["center"] = {fit.center.x(), fit.center.y(), fit.center.z()};
    if (fit.warning) {
      f["warning"] = *fit.warning;
      std::cerr << "warning: " << routine_name(rec.routine) << ": " << *fit.warning << '\n';
    }
    report["fits"][routine_name(rec.routine)] = f;
  }
  if (!a.report.empty()) write_text_file(a.report, report.dump(2) + "\n");
  std::cout << report["segment_lengths"].dump() << '\n';
}

// ---- estimate ---------------------------------------------------------------

struct EstimateArgs {
  std::string input;
  std::string model;
  std::string config;
  std::string out;
  std::string assumptions;
  std::optional<std::uint64_t> seed;
  std::optional<int> particles;
  std::string init;
  bool no_rula = false;
};

void run_estimate(const EstimateArgs& a) {
  const HumanModel model = load_model(a.model);
  FilterConfig cfg = a.config.empty() ? FilterConfig{} : filter_config_from_json(read_json_file(a.config));
  if (a.seed) cfg.seed = *a.seed;
  if (a.particles) cfg.particles = *a.particles;
  if (a.init == "uniform") cfg.init = InitMode::kUniform;
  else if (a.init == "neutral") cfg.init = InitMode::kNeutral;
  cfg.validate();
  const RulaAssumptions assume = load_assumptions(a.assumptions);

  Warnings warnings;
  const auto obs = read_trajectory(a.input, &warnings);
  print_warnings(warnings);
  check_time_ordering(obs, "cli");

  ParticleFilter filter(model, cfg);
  std::vector<EstimateRecord> records;
  records.reserve(obs.size());
  try {
    for (const auto& o : obs) {
      EstimateRecord rec;
      rec.estimate = filter.step(o);
      if (!a.no_rula) {
        rec.rula = score_distribution(filter.particles(), assume);
        rec.map_grand = score_posture(rec.estimate.map_state.q, assume).grand;
      }
      records.push_back(std::move(rec));
    }
  } catch (const DegenerateFilterError&) {
    if (!records.empty()) write_estimates(a.out, records);
    throw;
  }
  for (const auto& e : filter.events()) {
    std::cerr << "note: step " << e.step << " (t=" << e.timestamp << "): " << e.message << '\n';
  }
  write_estimates(a.out, records);
  std::cout << "wrote " << records.size() << " estimates to " << a.out << '\n';
}

// ---- ik ---------------------------------------------------------------------

struct IkArgs {
  std::string input;
  std::string model;
  std::string config;
  std::string method = "online";
  std::string out;
  std::string report;
};

void run_ik(const IkArgs& a) {
  const HumanModel model = load_model(a.model);
  const IkConfig cfg = a.config.empty() ? IkConfig{} : ik_config_from_json(read_json_file(a.config));
  Warnings warnings;
  const auto obs = read_trajectory(a.input, &warnings);
  print_warnings(warnings);

  IkResult result = online_ik(obs, model, cfg);
  nlohmann::ordered_json report;
  report["format_version"] = kFormatVersion;
  report["online"] = {{"objective", result.objective},
                      {"iterations", result.iterations},
                      {"flagged_steps", result.flagged}};
  if (a.method == "offline") {
    result = offline_traj_ik(obs, model, cfg, result.states);
    report["offline"] = {{"objective", result.objective},
                         {"iterations", result.iterations},
                         {"converged", result.flagged.empty()}};
  }
  if (!result.flagged.empty()) {
    std::cerr << "warning: " << result.flagged.size() << " step(s) did not converge\n";
  }
  PostureTrajectory out;
  for (const auto& o : obs) out.t.push_back(o.t);
  out.states = result.states;
  write_postures(a.out, out);
  if (!a.report.empty()) write_text_file(a.report, report.dump(2) + "\n");
  std::cout << "wrote " << out.states.size() << " postures to " << a.out << '\n';
}

// ---- rula -------------------------------------------------------------------

struct RulaArgs {
  std::string input;
  std::string assumptions;
  std::string out;
  std::string summary;
};

void run_rula(const RulaArgs& a) {
  const RulaAssumptions assume = load_assumptions(a.assumptions);
  std::vector<double> t, expected, stdev;
  std::vector<RulaScore> map_scores;
  if (is_estimate_file(a.input)) {
    bool warned = false;
    for (const auto& rec : read_estimates(a.input)) {
      const RulaScore s = score_posture(rec.estimate.map_state.q, assume);
      t.push_back(rec.estimate.timestamp);
      map_scores.push_back(s);
      if (rec.rula) {
        expected.push_back(rec.rula->expected);
        stdev.push_back(rec.rula->std);
      } else {
        if (!warned) std::cerr << "warning: no particle distribution in input; using MAP scores\n";
        warned = true;
        expected.push_back(s.grand);
        stdev.push_back(0.0);
      }
    }
  } else {
    const PostureTrajectory traj = read_postures(a.input);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      const RulaScore s = score_posture(traj.states[k].q, assume);
      t.push_back(traj.t[k]);
      map_scores.push_back(s);
      expected.push_back(s.grand);
      stdev.push_back(0.0);
    }
  }
  if (map_scores.empty()) throw InputError("cli", "no postures to score");

  std::string csv = "# format_version: " + std::to_string(kFormatVersion) + "\n";
  csv += "t,expected,std,grand_of_map\n";
  for (std::size_t k = 0; k < t.size(); ++k) {
    csv += format_double(t[k]) + ',' + format_double(expected[k]) + ',' + format_double(stdev[k]) +
           ',' + std::to_string(map_scores[k].grand) + '\n';
  }
  write_text_file(a.out, csv);

  const std::size_t peak = max_score_index(map_scores);
  const auto max_expected = std::max_element(expected.begin(), expected.end());
  nlohmann::ordered_json summary;
  summary["format_version"] = kFormatVersion;
  summary["max_grand"] = map_scores[peak].grand;
  summary["max_grand_t"] = t[peak];
  summary["action_level"] = map_scores[peak].action_level;
  summary["max_expected"] = *max_expected;
  summary["max_expected_t"] = t[static_cast<std::size_t>(max_expected - expected.begin())];
  const RulaScore& s = map_scores[peak];
  summary["components_at_max"] = {{"upper_arm", s.upper_arm}, {"lower_arm", s.lower_arm},
                                  {"wrist", s.wrist},         {"wrist_twist", s.wrist_twist},
                                  {"neck", s.neck},           {"trunk", s.trunk},
                                  {"legs", s.legs},           {"score_a", s.score_a},
                                  {"score_b", s.score_b}};
  if (!a.summary.empty()) write_text_file(a.summary, summary.dump(2) + "\n");
  std::cout << "max RULA grand score " << s.grand << " (action level " << s.action_level
            << ") at t=" << t[peak] << '\n';
}

// ---- compare ----------------------------------------------------------------

struct CompareArgs {
  std::string input;
  std::string against;
  std::string assumptions;
  std::string out;
};

void run_compare(const CompareArgs& a) {
  const RulaAssumptions assume = load_assumptions(a.assumptions);
  const PostureTrajectory est = load_postures_any(a.input);
  const PostureTrajectory ref = load_postures_any(a.against);
  const ComparisonReport report = compare_postures(est, ref, assume);
  const auto j = report_to_json(report);
  if (!a.out.empty()) write_text_file(a.out, j.dump(2) + "\n");
  std::cout << "pooled deviation median " << report.pooled.median << " rad (q1 " << report.pooled.q1
            << ", q3 " << report.pooled.q3 << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teleoperator posture estimation from leader-robot stylus trajectories"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic task (observations + ground truth) or calibration arcs");
  s->add_option("--task", synth.task, "line_x | line_y | circle | two_blocks | static | custom_spline")
      ->capture_default_str();
  s->add_option("--duration", synth.duration, "Seconds")->capture_default_str();
  s->add_option("--rate", synth.rate, "Sample rate in Hz")->capture_default_str();
  s->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  s->add_option("--pos-noise", synth.pos_noise, "Position noise std per axis (m)")->capture_default_str();
  s->add_option("--ori-noise", synth.ori_noise, "Orientation noise std per axis (rad)")->capture_default_str();
  s->add_option("--lin-noise", synth.lin_noise, "Linear velocity noise std (m/s)")->capture_default_str();
  s->add_option("--ang-noise", synth.ang_noise, "Angular velocity noise std (rad/s)")->capture_default_str();
  s->add_option("--model", synth.model, "Model file (default: bundled)");
  s->add_option("--observations", synth.observations, "Output stylus trajectory CSV");
  s->add_option("--truth", synth.truth, "Output ground-truth posture CSV");
  s->add_option("--clean", synth.clean, "Output noiseless stylus trajectory CSV");
  s->add_option("--calibration-dir", synth.calibration_dir, "Write the five calibration recordings here");
  s->add_option("--arc", synth.arc_deg, "Calibration sweep in degrees")->capture_default_str();
  s->add_option("--calib-noise", synth.calib_noise, "Calibration position noise, RMS (m)")->capture_default_str();

  CalibrateArgs calib;
  auto* c = app.add_subcommand("calibrate", "Estimate segment lengths from the five calibration recordings");
  c->add_option("--recording", calib.recordings, "Calibration CSV (repeat for each routine)")->required();
  c->add_option("--model", calib.model, "Template model (limits, neutral, base pose)");
  c->add_option("--out", calib.out, "Output model file")->required();
  c->add_option("--report", calib.report, "Output fit report JSON");
  c->add_option("--min-arc", calib.min_arc_deg, "Minimum arc span in degrees")->capture_default_str();
  c->add_option("--max-rms", calib.max_rms, "Maximum circle-fit RMS residual (m)")->capture_default_str();

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Run the particle filter on a stylus trajectory");
  e->add_option("--input", est.input, "Stylus trajectory CSV")->required();
  e->add_option("--model", est.model, "Model file (default: bundled)");
  e->add_option("--config", est.config, "Filter config JSON");
  e->add_option("--out", est.out, "Output estimates (JSON lines)")->required();
  e->add_option("--assumptions", est.assumptions, "RULA assumptions JSON");
  e->add_option("--seed", est.seed, "Override the config seed");
  e->add_option("--particles", est.particles, "Override the particle count");
  e->add_option("--init", est.init, "neutral | uniform")->check(CLI::IsMember({"neutral", "uniform"}));
  e->add_flag("--no-rula", est.no_rula, "Skip per-step RULA distributions");

  IkArgs ik;
  auto* k = app.add_subcommand("ik", "Run the online or offline least-squares IK baseline");
  k->add_option("--input", ik.input, "Stylus trajectory CSV")->required();
  k->add_option("--model", ik.model, "Model file (default: bundled)");
  k->add_option("--config", ik.config, "IK config JSON");
  k->add_option("--method", ik.method, "online | offline")
      ->check(CLI::IsMember({"online", "offline"}))
      ->capture_default_str();
  k->add_option("--out", ik.out, "Output posture CSV")->required();
  k->add_option("--report", ik.report, "Output solver diagnostics JSON");

  RulaArgs rula;
  auto* r = app.add_subcommand("rula", "Score postures or estimates with RULA");
  r->add_option("--input", rula.input, "Estimates (.jsonl) or posture CSV")->required();
  r->add_option("--assumptions,--config", rula.assumptions, "RULA assumptions JSON");
  r->add_option("--out", rula.out, "Output score CSV (t, expected, std, grand_of_map)")->required();
  r->add_option("--summary", rula.summary, "Output summary JSON");

  CompareArgs cmp;
  auto* m = app.add_subcommand("compare", "Deviation statistics and RULA agreement between two posture trajectories");
  m->add_option("--input", cmp.input, "Estimates (.jsonl) or posture CSV")->required();
  m->add_option("--against", cmp.against, "Reference posture CSV or estimates")->required();
  m->add_option("--assumptions,--config", cmp.assumptions, "RULA assumptions JSON");
  m->add_option("--out", cmp.out, "Output report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*s) run_synth(synth);
    else if (*c) run_calibrate(calib);
    else if (*e) run_estimate(est);
    else if (*k) run_ik(ik);
    else if (*r) run_rula(rula);
    else if (*m) run_compare(cmp);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitPipeline;
  } catch (const std::filesystem::filesystem_error& err) {
    std::cerr << "error: [cli] " << err.what() << '\n';
    return kExitPipeline;
  }
  return 0;
}
