#include <doctest.h>

#include <random>

#include "support.hpp"
#include "teleposture/errors.hpp"
#include "teleposture/model.hpp"
#include "teleposture/rotation.hpp"

using namespace teleposture;

namespace {

// Lengths chosen to differ from the bundled defaults.
HumanModel test_model(const TaskSpacePose& base = {}) {
  const HumanModel& d = HumanModel::default_model();
  return HumanModel({0.50, 0.20, 0.30, 0.25, 0.08}, d.limits_lo(), d.limits_hi(),
                    d.neutral_posture(), base);
}

}  // namespace

TEST_CASE("zero configuration composes the segment offsets") {
  // Upright torso, arm hanging at the side: up the torso, out to the right
  // shoulder, then straight down the upper arm, forearm and hand.
  const TaskSpacePose p = stylus_pose(test_model(), JointVector::Zero());
  CHECK(p.position.x() == doctest::Approx(0.0));
  CHECK(p.position.y() == doctest::Approx(-0.20));
  CHECK(p.position.z() == doctest::Approx(-0.13));
  CHECK(p.orientation.angularDistance(Eigen::Quaterniond::Identity()) < 1e-12);
}

TEST_CASE("neutral stylus pose of the bundled model") {
  // Elbow at 90 deg puts the forearm and hand forward: x = 0.26 + 0.08 from
  // the elbow, which sits 0.30 below the shoulder; the base pose moves that
  // point to the origin.
  const HumanModel& m = HumanModel::default_model();
  const TaskSpacePose p = stylus_pose(m, m.neutral_posture());
  CHECK(p.position.norm() < 1e-12);
}

TEST_CASE("zero rates give an exactly zero twist") {
  const HumanModel& m = HumanModel::default_model();
  const auto [pose, vel] = forward_kinematics(m, PostureState{m.neutral_posture(), JointVector::Zero()});
  CHECK(vel.linear == Eigen::Vector3d::Zero());
  CHECK(vel.angular == Eigen::Vector3d::Zero());
}

TEST_CASE("geometric Jacobian agrees with finite differences on 100 random postures") {
  const HumanModel& m = HumanModel::default_model();
  std::mt19937_64 rng(11);
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const JointVector q = testing_support::random_posture(m, rng);
    const Jacobian j = jacobian(m, q);
    const TaskSpacePose p0 = stylus_pose(m, q);
    for (int i = 0; i < kNumJoints; ++i) {
      JointVector qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const TaskSpacePose a = stylus_pose(m, qp), b = stylus_pose(m, qm);
      Eigen::Matrix<double, 6, 1> fd;
      fd.head<3>() = (a.position - b.position) / (2 * h);
      fd.tail<3>() = log_map(a.orientation * b.orientation.inverse()) / (2 * h);
      worst = std::max(worst, (fd - j.col(i)).cwiseAbs().maxCoeff());
      // Forward difference at delta = 1e-6 against J * delta.
      const TaskSpacePose fwd = stylus_pose(m, qp);
      CHECK(((fwd.position - p0.position) - j.col(i).head<3>() * h).norm() < 1e-9);
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("angular Jacobian columns are the world-frame joint axes") {
  const HumanModel& m = HumanModel::default_model();
  std::mt19937_64 rng(5);
  const JointVector q = testing_support::random_posture(m, rng);
  const ChainFrames f = chain_frames(m, q);
  const Jacobian j = jacobian(f);
  // Accumulate rotations by hand from the layout.
  Eigen::Matrix3d rot = m.base_pose().orientation.toRotationMatrix();
  for (int i = 0; i < kNumJoints; ++i) {
    const Eigen::Vector3d axis = rot * m.layout().axes[i];
    CHECK((j.col(i).tail<3>() - axis).norm() < 1e-12);
    rot = rot * Eigen::AngleAxisd(q[i], m.layout().axes[i]).toRotationMatrix();
  }
}

TEST_CASE("joint whose axis passes through the stylus has no linear part") {
  // At zero configuration the arm hangs straight down, so the internal
  // rotation and pronation axes (both +z) run through the stylus point.
  const Jacobian j = jacobian(test_model(), JointVector::Zero());
  CHECK(j.col(kShoulderInternalRotation).head<3>().norm() < 1e-15);
  CHECK(j.col(kForearmPronation).head<3>().norm() < 1e-15);
}

TEST_CASE("FK velocity equals J(q) qdot") {
  const HumanModel& m = HumanModel::default_model();
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    PostureState s{testing_support::random_posture(m, rng), JointVector::Zero()};
    for (int i = 0; i < kNumJoints; ++i) s.qdot[i] = n(rng);
    const auto [pose, vel] = forward_kinematics(m, s);
    const Eigen::Matrix<double, 6, 1> twist = jacobian(m, s.q) * s.qdot;
    CHECK((vel.linear - twist.head<3>()).norm() < 1e-12);
    CHECK((vel.angular - twist.tail<3>()).norm() < 1e-12);
  }
}

TEST_CASE("twist sensitivity matches finite differences of J qdot") {
  const HumanModel& m = HumanModel::default_model();
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const JointVector q = testing_support::random_posture(m, rng);
    JointVector qd;
    for (int i = 0; i < kNumJoints; ++i) qd[i] = n(rng);
    const Jacobian s = twist_sensitivity(chain_frames(m, q), qd);
    for (int i = 0; i < kNumJoints; ++i) {
      JointVector qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const Eigen::Matrix<double, 6, 1> fd = (jacobian(m, qp) * qd - jacobian(m, qm) * qd) / (2 * h);
      CHECK((fd - s.col(i)).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("rigid change of the base pose moves the stylus rigidly") {
  const Eigen::Quaterniond r(Eigen::AngleAxisd(0.8, Eigen::Vector3d(1, -1, 2).normalized()));
  const Eigen::Vector3d t(0.3, -0.1, 0.5);
  const HumanModel a = test_model();
  const HumanModel b = test_model({t, r});
  std::mt19937_64 rng(2);
  const JointVector q = testing_support::random_posture(a, rng);
  const TaskSpacePose pa = stylus_pose(a, q), pb = stylus_pose(b, q);
  CHECK((pb.position - (r * pa.position + t)).norm() < 1e-12);
  CHECK(pb.orientation.angularDistance(r * pa.orientation) < 1e-9);
}

TEST_CASE("emitted quaternions are unit norm with canonical sign") {
  const HumanModel& m = HumanModel::default_model();
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const TaskSpacePose p = stylus_pose(m, testing_support::random_posture(m, rng));
    CHECK(std::abs(p.orientation.norm() - 1.0) < 1e-9);
    CHECK(p.orientation.w() >= 0.0);
  }
}

TEST_CASE("clamping projects onto the limit box") {
  const HumanModel& m = HumanModel::default_model();
  const JointVector inside = m.neutral_posture();
  CHECK(clamp_posture(m, inside) == inside);

  JointVector q = inside;
  q[kShoulderAbduction] = m.limits_hi()[kShoulderAbduction] + 0.3;
  CHECK(clamp_posture(m, q)[kShoulderAbduction] == m.limits_hi()[kShoulderAbduction]);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    JointVector r;
    for (int i = 0; i < kNumJoints; ++i) r[i] = n(rng);
    const JointVector c = clamp_posture(m, r);
    CHECK(clamp_posture(m, c) == c);
    CHECK(within_limits(m, c));
  }
}

TEST_CASE("segment lengths are validated") {
  CHECK_THROWS_AS(SegmentLengths({0.5, 0.2, -0.3, 0.25, 0.08}).validate(), InputError);
  CHECK_THROWS_AS(SegmentLengths({2.5, 0.2, 0.3, 0.25, 0.08}).validate(), InputError);
  CHECK_NOTHROW(SegmentLengths({0.5, 0.2, 0.3, 0.25, 0.08}).validate());
  CHECK(joint_index("elbow_flexion") == kElbowFlexion);
  CHECK_THROWS_AS(joint_index("knee"), InputError);
}
