#pragma once

#include <random>

#include "teleposture/model.hpp"

namespace teleposture {

using Rng = std::mt19937_64;

/// Per-step velocity-increment covariance (diagonal) and the step length.
struct MotionNoise {
  JointVector sigma_v = JointVector::Zero();  // (rad/s)^2, diagonal entries
  double dt = 0.0;

  void validate() const;
};

/// Acceleration covariance rate (rad/s)^2 per second such that a 0.01 s step
/// reproduces 0.01 * diag(0.01 x3 torso, 0.05 x7 arm). The printed value has
/// six entries; the four distal joints reuse the arm value.
JointVector default_accel_rate();

/// sigma_v = rate * dt.
MotionNoise motion_noise_for_step(const JointVector& accel_rate, double dt);

/// Constant-velocity step with Gaussian velocity increments:
/// qdot' ~ N(qdot, sigma_v), q' = q + qdot' dt. No limit handling.
PostureState propagate(const PostureState& state, const MotionNoise& noise, Rng& rng);

/// propagate() followed by projection onto the joint limits. A joint that
/// had to be clamped loses its velocity.
PostureState propagate_within_limits(const HumanModel& model, const PostureState& state,
                                     const MotionNoise& noise, Rng& rng);

/// Deterministic part of the motion model: (q + qdot dt, qdot).
PostureState predict_mean(const PostureState& state, double dt);

}  // namespace teleposture
