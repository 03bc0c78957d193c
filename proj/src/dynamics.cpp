#include "teleposture/dynamics.hpp"

#include <cmath>

#include "teleposture/errors.hpp"

namespace teleposture {

void MotionNoise::validate() const {
  if (!sigma_v.allFinite() || (sigma_v.array() < 0.0).any()) {
    throw ConfigError("dynamics", "motion covariance entries must be finite and >= 0");
  }
  if (!std::isfinite(dt) || dt <= 0.0) {
    throw ConfigError("dynamics", "dt must be positive");
  }
}

JointVector default_accel_rate() {
  JointVector rate;
  rate << 0.01, 0.01, 0.01, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05;
  return rate;
}

MotionNoise motion_noise_for_step(const JointVector& accel_rate, double dt) {
  MotionNoise noise{accel_rate * dt, dt};
  noise.validate();
  return noise;
}

PostureState predict_mean(const PostureState& state, double dt) {
  return {state.q + state.qdot * dt, state.qdot};
}

PostureState propagate(const PostureState& state, const MotionNoise& noise, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  PostureState out;
  for (int i = 0; i < kNumJoints; ++i) {
    const double sd = std::sqrt(noise.sigma_v[i]);
    // Draw even when sd == 0 so the stream layout does not depend on the noise values.
    const double z = normal(rng);
    out.qdot[i] = state.qdot[i] + sd * z;
  }
  out.q = state.q + out.qdot * noise.dt;
  return out;
}

PostureState propagate_within_limits(const HumanModel& model, const PostureState& state,
                                     const MotionNoise& noise, Rng& rng) {
  PostureState out = propagate(state, noise, rng);
  const JointVector clamped = clamp_posture(model, out.q);
  for (int i = 0; i < kNumJoints; ++i) {
    if (clamped[i] != out.q[i]) out.qdot[i] = 0.0;
  }
  out.q = clamped;
  return out;
}

}  // namespace teleposture
