#include <doctest.h>

#include "teleposture/dynamics.hpp"
#include "teleposture/errors.hpp"

using namespace teleposture;

TEST_CASE("default acceleration rate reproduces the per-step covariance at 100 Hz") {
  const MotionNoise n = motion_noise_for_step(default_accel_rate(), 0.01);
  for (int i = 0; i < 3; ++i) CHECK(n.sigma_v[i] == doctest::Approx(0.01 * 0.01));
  for (int i = 3; i < kNumJoints; ++i) CHECK(n.sigma_v[i] == doctest::Approx(0.01 * 0.05));
}

TEST_CASE("noiseless propagation is the explicit Euler step") {
  Rng rng(1);
  MotionNoise none;
  none.dt = 0.02;
  PostureState s;
  s.q.setConstant(0.3);
  CHECK(propagate(s, none, rng).q == s.q);

  JointVector c;
  c << 1, -1, 0.5, 2, -2, 0.25, 0, 3, -0.5, 1.5;
  s.qdot = c;
  const PostureState next = propagate(s, none, rng);
  CHECK(next.qdot == c);
  CHECK(next.q == s.q + c * 0.02);
  const PostureState mean = predict_mean(s, 0.02);
  CHECK(mean.q == next.q);
}

TEST_CASE("velocity increments have the configured covariance") {
  const MotionNoise noise = motion_noise_for_step(default_accel_rate(), 0.01);
  Rng rng(42);
  constexpr int kSamples = 100000;
  PostureState s;
  s.qdot.setConstant(0.2);
  Eigen::Matrix<double, kNumJoints, kNumJoints> cov = decltype(cov)::Zero();
  JointVector mean = JointVector::Zero();
  for (int k = 0; k < kSamples; ++k) {
    const JointVector d = propagate(s, noise, rng).qdot - s.qdot;
    mean += d;
    cov += d * d.transpose();
  }
  mean /= kSamples;
  cov /= kSamples;
  for (int i = 0; i < kNumJoints; ++i) {
    CHECK(std::abs(cov(i, i) - noise.sigma_v[i]) / noise.sigma_v[i] < 0.05);
    // Mean preservation within 3 sigma / sqrt(N).
    CHECK(std::abs(mean[i]) < 3.0 * std::sqrt(noise.sigma_v[i] / kSamples));
    for (int j = 0; j < i; ++j) CHECK(std::abs(cov(i, j)) < 0.05 * noise.sigma_v[i]);
  }
}

TEST_CASE("propagation is deterministic for a fixed seed") {
  const MotionNoise noise = motion_noise_for_step(default_accel_rate(), 0.02);
  Rng a(7), b(7);
  PostureState sa, sb;
  for (int k = 0; k < 100; ++k) {
    sa = propagate(sa, noise, a);
    sb = propagate(sb, noise, b);
  }
  CHECK(sa.q == sb.q);
  CHECK(sa.qdot == sb.qdot);
}

TEST_CASE("clamped joints lose their velocity") {
  const HumanModel& m = HumanModel::default_model();
  Rng rng(0);
  MotionNoise none;
  none.dt = 0.1;
  PostureState s{m.neutral_posture(), JointVector::Zero()};
  s.q[kElbowFlexion] = m.limits_hi()[kElbowFlexion] - 0.01;
  s.qdot[kElbowFlexion] = 1.0;
  s.qdot[kWristFlexion] = 0.5;
  const PostureState next = propagate_within_limits(m, s, none, rng);
  CHECK(next.q[kElbowFlexion] == m.limits_hi()[kElbowFlexion]);
  CHECK(next.qdot[kElbowFlexion] == 0.0);
  CHECK(next.qdot[kWristFlexion] == 0.5);
}

TEST_CASE("invalid noise settings are rejected") {
  MotionNoise bad;
  bad.dt = -0.1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.dt = 0.01;
  bad.sigma_v[0] = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}
