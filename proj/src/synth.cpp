#include "teleposture/synth.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "teleposture/dynamics.hpp"
#include "teleposture/errors.hpp"
#include "teleposture/rotation.hpp"

namespace teleposture {

namespace {

constexpr const char* kModule = "synth";
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::uint64_t kNoiseStream = 0x9E3779B97F4A7C15ULL;
constexpr double kComfortScale = 0.2;
constexpr double kIgnoredVariance = 1e6;
constexpr double kSeedSmoothingRelax = 1e4;

struct PathPoint {
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();    // from the neutral stylus position
  Eigen::Vector3d rotation = Eigen::Vector3d::Zero();  // world rotation vector applied to R0
  Eigen::Vector3d linear = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular = Eigen::Vector3d::Zero();
};

// Rest-to-rest reciprocating profile: s in [0, 1], starts and ends at rest.
void reciprocate(double t, double period, double& s, double& sdot) {
  s = 0.5 * (1.0 - std::cos(kTwoPi * t / period));
  sdot = 0.5 * kTwoPi / period * std::sin(kTwoPi * t / period);
}

void minimum_jerk(double tau, double seg, double& s, double& sdot) {
  tau = std::clamp(tau, 0.0, 1.0);
  const double t2 = tau * tau;
  s = t2 * tau * (10.0 - 15.0 * tau + 6.0 * t2);
  sdot = 30.0 * t2 * (1.0 - 2.0 * tau + t2) / seg;
}

struct Waypoint {
  Eigen::Vector3d offset;
  Eigen::Quaterniond rotation;  // relative to the neutral orientation, world frame
};

std::vector<Waypoint> block_waypoints(std::size_t count, Rng& rng) {
  // Two blocks in front of the hand at different heights; each visit lands
  // on a random side (left or right face) with a random hand rotation.
  const std::array<Eigen::Vector3d, 2> blocks = {Eigen::Vector3d(0.10, 0.10, -0.02),
                                                 Eigen::Vector3d(0.14, -0.10, 0.10)};
  std::uniform_int_distribution<int> side(0, 1);
  std::uniform_real_distribution<double> yaw(-0.6, 0.6);
  std::uniform_real_distribution<double> roll(-0.3, 0.3);
  std::vector<Waypoint> out;
  out.push_back({Eigen::Vector3d::Zero(), Eigen::Quaterniond::Identity()});
  for (std::size_t k = 0; k < count; ++k) {
    Eigen::Vector3d p = blocks[k % 2];
    p.y() += side(rng) == 0 ? -0.04 : 0.04;
    const Eigen::Vector3d rv(roll(rng), 0.0, yaw(rng));
    out.push_back({p, exp_map(rv)});
  }
  return out;
}

PathPoint sample_path(TaskKind kind, double t, const std::vector<Waypoint>& waypoints) {
  PathPoint pt;
  double s = 0.0, sdot = 0.0;
  switch (kind) {
    case TaskKind::kLineX:
      reciprocate(t, 4.0, s, sdot);
      pt.offset.x() = 0.15 * s;
      pt.linear.x() = 0.15 * sdot;
      break;
    case TaskKind::kLineY:
      reciprocate(t, 4.0, s, sdot);
      pt.offset.y() = 0.15 * s;
      pt.linear.y() = 0.15 * sdot;
      break;
    case TaskKind::kCircle: {
      // Angular rate ramps up from rest with time constant tau.
      const double radius = 0.10, omega = kTwoPi / 5.0, tau = 0.5;
      const double phi = omega * (t - tau * (1.0 - std::exp(-t / tau)));
      const double phidot = omega * (1.0 - std::exp(-t / tau));
      pt.offset = Eigen::Vector3d(radius * (1.0 - std::cos(phi)), radius * std::sin(phi), 0.0);
      pt.linear = Eigen::Vector3d(radius * std::sin(phi), radius * std::cos(phi), 0.0) * phidot;
      break;
    }
    case TaskKind::kTwoBlocks: {
      const double seg = 1.6, dwell = 0.4, lead = 0.5;
      if (t < lead) break;
      const auto k = static_cast<std::size_t>((t - lead) / (seg + dwell));
      const double local = t - lead - static_cast<double>(k) * (seg + dwell);
      const Waypoint& a = waypoints[std::min(k, waypoints.size() - 1)];
      const Waypoint& b = waypoints[std::min(k + 1, waypoints.size() - 1)];
      minimum_jerk(local / seg, seg, s, sdot);
      if (local >= seg) sdot = 0.0;
      const Eigen::Vector3d phi = rotation_difference(b.rotation, a.rotation);
      pt.offset = a.offset + s * (b.offset - a.offset);
      pt.linear = sdot * (b.offset - a.offset);
      pt.rotation = log_map(exp_map(s * phi) * a.rotation);
      pt.angular = sdot * phi;
      break;
    }
    case TaskKind::kStatic:
    case TaskKind::kCustomSpline:
      break;
  }
  return pt;
}

std::size_t sample_count(const SyntheticTask& task) {
  return static_cast<std::size_t>(std::floor(task.duration * task.rate + 1e-9)) + 1;
}

// q(t) = neutral + A (1 - cos(w t)) / 2 per joint, kept inside the limits.
std::vector<PostureState> spline_truth(const HumanModel& model, const SyntheticTask& task, Rng& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> freq(0.1, 0.3);
  const JointVector& n = model.neutral_posture();
  JointVector amp, omega;
  for (int i = 0; i < kNumJoints; ++i) {
    const double scale = i < kShoulderFlexion ? 0.05 : 0.4;
    double a = scale * unit(rng);
    const double room = a > 0.0 ? model.limits_hi()[i] - n[i] : n[i] - model.limits_lo()[i];
    if (std::abs(a) > 0.9 * room) a = std::copysign(0.9 * room, a);
    amp[i] = a;
    omega[i] = kTwoPi * freq(rng);
  }
  std::vector<PostureState> out;
  const std::size_t count = sample_count(task);
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / task.rate;
    PostureState s;
    for (int i = 0; i < kNumJoints; ++i) {
      s.q[i] = n[i] + 0.5 * amp[i] * (1.0 - std::cos(omega[i] * t));
      s.qdot[i] = 0.5 * amp[i] * omega[i] * std::sin(omega[i] * t);
    }
    out.push_back(s);
  }
  return out;
}

// Pose-only IK with a pull towards neutral and light smoothing; joint
// velocities by finite differences. Seeds the trajectory refinement.
std::vector<PostureState> comfortable_path_ik(const HumanModel& model, const SyntheticTask& task,
                                              const std::vector<StylusObservation>& path,
                                              double tolerance) {
  IkConfig cfg = IkConfig::tracking();
  cfg.sigma1.tail<6>().setConstant(kIgnoredVariance);
  cfg.accel_rate *= kSeedSmoothingRelax;
  cfg.comfort_scale = kComfortScale;
  std::vector<PostureState> states = online_ik(path, model, cfg).states;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const double err = (stylus_pose(model, states[k].q).position - path[k].pose.position).norm();
    if (err > tolerance) {
      throw GenerationError(kModule, task_name(task.kind) + ": waypoint " + std::to_string(k) +
                                         " (t=" + std::to_string(path[k].t) +
                                         ") is not reachable; tracking error " +
                                         std::to_string(err) + " m");
    }
  }
  const std::size_t n = states.size();
  for (std::size_t k = 0; k < n && n > 1; ++k) {
    const std::size_t a = k == 0 ? 0 : k - 1;
    const std::size_t b = k + 1 == n ? k : k + 1;
    states[k].qdot = (states[b].q - states[a].q) / (path[b].t - path[a].t);
  }
  return states;
}

StylusObservation observe(const HumanModel& model, const PostureState& s, double t) {
  const auto [pose, vel] = forward_kinematics(model, s);
  return {t, pose, vel};
}

}  // namespace

std::string task_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::kLineX: return "line_x";
    case TaskKind::kLineY: return "line_y";
    case TaskKind::kCircle: return "circle";
    case TaskKind::kTwoBlocks: return "two_blocks";
    case TaskKind::kStatic: return "static";
    case TaskKind::kCustomSpline: return "custom_spline";
  }
  return "unknown";
}

TaskKind parse_task(std::string_view name) {
  for (TaskKind k : {TaskKind::kLineX, TaskKind::kLineY, TaskKind::kCircle, TaskKind::kTwoBlocks,
                     TaskKind::kStatic, TaskKind::kCustomSpline}) {
    if (task_name(k) == name) return k;
  }
  throw InputError(kModule, "unknown task '" + std::string(name) + "'");
}

void SyntheticTask::validate() const {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw InputError(kModule, "rate must be positive");
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw InputError(kModule, "duration must be positive");
  }
  if (!noise_variance.allFinite() || (noise_variance.array() < 0.0).any()) {
    throw InputError(kModule, "noise variances must be finite and >= 0");
  }
}

Vector12 noise_variances(double position_sd, double orientation_sd, double linear_sd,
                         double angular_sd) {
  Vector12 v;
  v.segment<3>(0).setConstant(position_sd * position_sd);
  v.segment<3>(3).setConstant(orientation_sd * orientation_sd);
  v.segment<3>(6).setConstant(linear_sd * linear_sd);
  v.segment<3>(9).setConstant(angular_sd * angular_sd);
  return v;
}

std::vector<StylusObservation> task_path(const HumanModel& model, const SyntheticTask& task) {
  task.validate();
  const TaskSpacePose start = stylus_pose(model, model.neutral_posture());
  Rng rng(task.seed);
  std::vector<Waypoint> waypoints;
  if (task.kind == TaskKind::kTwoBlocks) {
    waypoints = block_waypoints(static_cast<std::size_t>(task.duration / 2.0) + 2, rng);
  }
  std::vector<StylusObservation> path;
  const std::size_t count = sample_count(task);
  path.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / task.rate;
    const PathPoint pt = sample_path(task.kind, t, waypoints);
    StylusObservation obs;
    obs.t = t;
    obs.pose.position = start.position + pt.offset;
    obs.pose.orientation = canonical(exp_map(pt.rotation) * start.orientation);
    obs.velocity.linear = pt.linear;
    obs.velocity.angular = pt.angular;
    path.push_back(obs);
  }
  return path;
}

SyntheticData generate_task(const HumanModel& model, const SyntheticTask& task, double tolerance) {
  task.validate();
  SyntheticData data;
  const std::vector<StylusObservation> path = task_path(model, task);

  if (task.kind == TaskKind::kStatic) {
    data.truth.assign(path.size(), PostureState{model.neutral_posture(), JointVector::Zero()});
  } else if (task.kind == TaskKind::kCustomSpline) {
    Rng rng(task.seed);
    data.truth = spline_truth(model, task, rng);
  } else {
    const std::vector<PostureState> seed = comfortable_path_ik(model, task, path, tolerance);
    IkConfig refine = IkConfig::tracking();
    refine.comfort_scale = kComfortScale;
    data.truth = offline_traj_ik(path, model, refine, seed).states;
  }

  data.clean.reserve(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) {
    data.clean.push_back(observe(model, data.truth[k], path[k].t));
    if (task.kind != TaskKind::kCustomSpline) {
      const double err = (data.clean[k].pose.position - path[k].pose.position).norm();
      data.max_tracking_error = std::max(data.max_tracking_error, err);
      if (err > tolerance) {
        throw GenerationError(kModule, task_name(task.kind) + ": ground truth misses waypoint " +
                                           std::to_string(k) + " by " + std::to_string(err) + " m");
      }
    }
  }

  data.observations = data.clean;
  if ((task.noise_variance.array() > 0.0).any()) {
    Rng rng(task.seed ^ kNoiseStream);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Vector12 sd = task.noise_variance.cwiseSqrt();
    for (auto& obs : data.observations) {
      Vector12 e;
      for (int i = 0; i < 12; ++i) e[i] = sd[i] * normal(rng);
      obs.pose.position += e.segment<3>(0);
      obs.pose.orientation = canonical(exp_map(e.segment<3>(3)) * obs.pose.orientation);
      obs.velocity.linear += e.segment<3>(6);
      obs.velocity.angular += e.segment<3>(9);
    }
  }
  return data;
}

CalibrationRecording generate_calibration(const HumanModel& model, CalibrationRoutine routine,
                                          double arc_deg, double noise_m, std::uint64_t seed,
                                          std::size_t samples, double duration) {
  if (!(arc_deg > 0.0) || !std::isfinite(arc_deg)) throw InputError(kModule, "arc must be positive");
  if (!(noise_m >= 0.0)) throw InputError(kModule, "noise must be >= 0");
  if (samples < 2 || !(duration > 0.0)) throw InputError(kModule, "need >= 2 samples over a positive duration");
  const int joint = routine_joint(routine);
  const double half = 0.5 * arc_deg * std::numbers::pi / 180.0;
  const JointVector& neutral = model.neutral_posture();
  if (neutral[joint] - half < model.limits_lo()[joint] ||
      neutral[joint] + half > model.limits_hi()[joint]) {
    throw InputError(kModule, routine_name(routine) + ": arc of " + std::to_string(arc_deg) +
                                  " deg leaves the range of " + joint_names()[joint]);
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, noise_m / std::sqrt(3.0));
  CalibrationRecording rec;
  rec.routine = routine;
  rec.samples.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = duration * static_cast<double>(k) / static_cast<double>(samples);
    JointVector q = neutral;
    q[joint] += half * std::sin(kTwoPi * t / duration);
    Eigen::Vector3d p = stylus_pose(model, q).position;
    if (noise_m > 0.0) p += Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
    rec.samples.push_back({t, p});
  }
  return rec;
}

}  // namespace teleposture
