#include <doctest.h>

#include <cmath>
#include <random>

#include "teleposture/errors.hpp"
#include "teleposture/ik.hpp"
#include "teleposture/synth.hpp"

using namespace teleposture;

namespace {

StylusObservation observe(const HumanModel& m, const PostureState& s, double t) {
  const auto [pose, vel] = forward_kinematics(m, s);
  return {t, pose, vel};
}

SyntheticData make_task(TaskKind kind, double duration, std::uint64_t seed, bool noisy) {
  SyntheticTask task;
  task.kind = kind;
  task.duration = duration;
  task.rate = 50.0;
  task.seed = seed;
  if (noisy) task.noise_variance = noise_variances(0.002, 0.01, 0.01, 0.05);
  return generate_task(HumanModel::default_model(), task);
}

double mean_deviation(const std::vector<PostureState>& a, const std::vector<PostureState>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k].q - b[k].q).cwiseAbs().sum();
  return s / static_cast<double>(a.size() * kNumJoints);
}

}  // namespace

TEST_CASE("static observation at neutral keeps the neutral posture") {
  const HumanModel& m = HumanModel::default_model();
  std::vector<StylusObservation> traj;
  for (int k = 0; k < 50; ++k) traj.push_back(observe(m, {m.neutral_posture(), JointVector::Zero()}, 0.02 * k));
  const IkResult online = online_ik(traj, m, IkConfig{});
  for (const auto& s : online.states) {
    CHECK((s.q - m.neutral_posture()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(s.qdot.cwiseAbs().maxCoeff() < 1e-8);
  }
  const IkResult offline = offline_traj_ik(traj, m, IkConfig{}, online.states);
  for (const auto& s : offline.states) CHECK((s.q - m.neutral_posture()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("smooth noiseless joint motion is tracked to 1e-6") {
  const HumanModel& m = HumanModel::default_model();
  const SyntheticData data = make_task(TaskKind::kCustomSpline, 2.0, 4, false);
  const IkResult res = online_ik(data.observations, m, IkConfig::tracking());
  double worst = 0.0;
  for (std::size_t k = 0; k < res.states.size(); ++k) {
    const TaskSpacePose p = stylus_pose(m, res.states[k].q);
    worst = std::max(worst, (p.position - data.observations[k].pose.position).norm());
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("online solutions stay within bounds on 100 random tasks") {
  const HumanModel& m = HumanModel::default_model();
  IkConfig cfg;
  cfg.restarts = 1;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const TaskKind kind = seed % 2 ? TaskKind::kCustomSpline : TaskKind::kTwoBlocks;
    SyntheticTask task;
    task.kind = kind;
    task.duration = kind == TaskKind::kTwoBlocks ? 3.0 : 1.0;
    task.rate = 20.0;
    task.seed = seed;
    task.noise_variance = noise_variances(0.01, 0.05, 0.05, 0.2);
    const SyntheticData data = generate_task(m, task);
    for (const auto& s : online_ik(data.observations, m, cfg).states) CHECK(within_limits(m, s.q));
  }
}

TEST_CASE("offline refinement at an optimum is a fixed point") {
  const HumanModel& m = HumanModel::default_model();
  const SyntheticData data = make_task(TaskKind::kCircle, 2.0, 1, true);
  const IkConfig cfg;
  const IkResult first = offline_traj_ik(data.observations, m, cfg, online_ik(data.observations, m, cfg).states);
  const IkResult again = offline_traj_ik(data.observations, m, cfg, first.states);
  double change = 0.0;
  for (std::size_t k = 0; k < first.states.size(); ++k) {
    change = std::max(change, (again.states[k].q - first.states[k].q).cwiseAbs().maxCoeff());
  }
  CHECK(change < 1e-6);
  CHECK(again.objective <= first.objective);
}

TEST_CASE("offline never increases the objective and matches the dense solve") {
  const HumanModel& m = HumanModel::default_model();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SyntheticData data = make_task(TaskKind::kLineY, 2.0, seed, true);
    IkConfig cfg;
    const IkResult online = online_ik(data.observations, m, cfg);
    const double before = trajectory_objective(data.observations, m, cfg, online.states);
    CHECK(before == doctest::Approx(online.objective));
    const IkResult banded = offline_traj_ik(data.observations, m, cfg, online.states);
    CHECK(banded.objective <= before);
    for (const auto& s : banded.states) CHECK(within_limits(m, s.q));

    cfg.dense = true;
    const IkResult dense = offline_traj_ik(data.observations, m, cfg, online.states);
    CHECK(dense.objective == doctest::Approx(banded.objective).epsilon(1e-6));
  }
}

TEST_CASE("offline and online deviations are statistically tied") {
  const HumanModel& m = HumanModel::default_model();
  const IkConfig cfg;
  double diff = 0.0;
  constexpr int kTrials = 20;
  for (int trial = 0; trial < kTrials; ++trial) {
    const TaskKind kind = trial % 2 ? TaskKind::kCircle : TaskKind::kLineX;
    const SyntheticData data = make_task(kind, 3.0, static_cast<std::uint64_t>(100 + trial), true);
    const IkResult online = online_ik(data.observations, m, cfg);
    const IkResult offline = offline_traj_ik(data.observations, m, cfg, online.states);
    diff += mean_deviation(offline.states, data.truth) - mean_deviation(online.states, data.truth);
  }
  diff /= kTrials;
  MESSAGE("mean offline - online deviation: " << diff << " rad");
  CHECK(diff <= 0.02);
}

TEST_CASE("analytic residual Jacobian matches finite differences") {
  const HumanModel& m = HumanModel::default_model();
  const IkConfig cfg;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 0.5);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    ik_detail::StepVector x;
    for (int i = 0; i < kNumJoints; ++i) {
      x[i] = m.limits_lo()[i] + u(rng) * m.range_of_motion()[i];
      x[kNumJoints + i] = n(rng);
    }
    PostureState other{m.neutral_posture(), JointVector::Constant(0.1)};
    const StylusObservation obs = observe(m, other, 0.0);
    const auto jac = ik_detail::observation_jacobian(m, cfg, obs, x);
    // Residuals are whitened by tiny variances; compare relative to their scale.
    for (int j = 0; j < 20; ++j) {
      ik_detail::StepVector xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const Eigen::Matrix<double, 12, 1> fd = (ik_detail::observation_residual(m, cfg, obs, xp) -
                       ik_detail::observation_residual(m, cfg, obs, xm)) / (2 * h);
      const double scale = std::max(1.0, jac.col(j).cwiseAbs().maxCoeff());
      CHECK((fd - jac.col(j)).cwiseAbs().maxCoeff() / scale < 1e-5);
    }
  }
}

TEST_CASE("motion residual vanishes on a constant-velocity step") {
  const IkConfig cfg;
  ik_detail::StepVector prev, next;
  prev << JointVector::Constant(0.2), JointVector::Constant(-0.5);
  next << JointVector::Constant(0.2 - 0.5 * 0.02), JointVector::Constant(-0.5);
  CHECK(ik_detail::motion_residual(cfg, prev, next, 0.02).norm() < 1e-12);
}

TEST_CASE("configuration validation") {
  IkConfig cfg;
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.comfort_scale = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.sigma1[0] = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
