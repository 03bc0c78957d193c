#include <doctest.h>

#include "teleposture/errors.hpp"
#include "teleposture/io.hpp"
#include "teleposture/synth.hpp"

using namespace teleposture;

namespace {

SyntheticTask task_of(TaskKind kind, double duration, std::uint64_t seed = 0) {
  SyntheticTask t;
  t.kind = kind;
  t.duration = duration;
  t.rate = 50.0;
  t.seed = seed;
  return t;
}

}  // namespace

TEST_CASE("noiseless observations equal FK of the truth") {
  const HumanModel& m = HumanModel::default_model();
  const SyntheticData d = generate_task(m, task_of(TaskKind::kLineY, 2.0));
  REQUIRE(d.truth.size() == d.observations.size());
  for (std::size_t k = 0; k < d.truth.size(); ++k) {
    const auto [pose, vel] = forward_kinematics(m, d.truth[k]);
    CHECK(d.observations[k].pose.position == pose.position);
    CHECK(d.observations[k].pose.orientation.coeffs() == pose.orientation.coeffs());
    CHECK(d.observations[k].velocity.linear == vel.linear);
    CHECK(d.observations[k].velocity.angular == vel.angular);
    CHECK(within_limits(m, d.truth[k].q));
  }
}

TEST_CASE("static task holds still") {
  const HumanModel& m = HumanModel::default_model();
  const SyntheticData d = generate_task(m, task_of(TaskKind::kStatic, 2.0));
  for (const auto& s : d.truth) {
    CHECK(s.qdot.isZero(0.0));
    CHECK(s.q == m.neutral_posture());
  }
}

TEST_CASE("circle task is traced within 2 mm") {
  const HumanModel& m = HumanModel::default_model();
  SyntheticTask t = task_of(TaskKind::kCircle, 10.0);
  const auto path = task_path(m, t);
  const SyntheticData d = generate_task(m, t);
  CHECK(d.max_tracking_error < 0.002);
  double radius = 0.0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    CHECK((stylus_pose(m, d.truth[k].q).position - path[k].pose.position).norm() < 0.002);
    radius = std::max(radius, path[k].pose.position.head<2>().norm());
  }
  // The circle passes through the neutral point, so its far side is 2 r away.
  CHECK(radius == doctest::Approx(0.2).epsilon(0.01));
}

TEST_CASE("commanded paths start at rest at the neutral stylus pose") {
  const HumanModel& m = HumanModel::default_model();
  const TaskSpacePose start = stylus_pose(m, m.neutral_posture());
  for (TaskKind kind : {TaskKind::kLineX, TaskKind::kLineY, TaskKind::kCircle, TaskKind::kTwoBlocks}) {
    const auto path = task_path(m, task_of(kind, 5.0, 3));
    CHECK(path.size() == 251);  // both ends of [0, 5] s
    CHECK((path.front().pose.position - start.position).norm() < 1e-12);
    CHECK(path.front().velocity.linear.norm() < 1e-12);
    CHECK(parse_task(task_name(kind)) == kind);
  }
}

TEST_CASE("generation is deterministic and seed dependent") {
  const HumanModel& m = HumanModel::default_model();
  SyntheticTask t = task_of(TaskKind::kTwoBlocks, 4.0, 21);
  t.noise_variance = noise_variances(0.002, 0.01, 0.01, 0.05);
  const std::string a = format_trajectory(generate_task(m, t).observations);
  const std::string b = format_trajectory(generate_task(m, t).observations);
  CHECK(a == b);
  t.seed = 22;
  CHECK(format_trajectory(generate_task(m, t).observations) != a);
}

TEST_CASE("observation noise has the requested spread") {
  const HumanModel& m = HumanModel::default_model();
  SyntheticTask t = task_of(TaskKind::kStatic, 40.0, 5);
  t.noise_variance = noise_variances(0.002, 0.01, 0.01, 0.05);
  const SyntheticData d = generate_task(m, t);
  double pos = 0.0, ori = 0.0;
  for (std::size_t k = 0; k < d.clean.size(); ++k) {
    pos += (d.observations[k].pose.position - d.clean[k].pose.position).squaredNorm();
    ori += d.observations[k].pose.orientation.angularDistance(d.clean[k].pose.orientation) *
           d.observations[k].pose.orientation.angularDistance(d.clean[k].pose.orientation);
  }
  const double n = static_cast<double>(d.clean.size());
  CHECK(std::sqrt(pos / (3 * n)) == doctest::Approx(0.002).epsilon(0.1));
  CHECK(std::sqrt(ori / (3 * n)) == doctest::Approx(0.01).epsilon(0.1));
}

TEST_CASE("invalid tasks are rejected") {
  SyntheticTask t = task_of(TaskKind::kCircle, 0.0);
  CHECK_THROWS_AS(t.validate(), InputError);
  t = task_of(TaskKind::kCircle, 1.0);
  t.rate = -5;
  CHECK_THROWS_AS(t.validate(), InputError);
  CHECK_THROWS_AS(parse_task("spiral"), InputError);
}
