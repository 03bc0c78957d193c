#pragma once

#include <random>

#include <Eigen/Core>

#include "teleposture/model.hpp"

namespace testing_support {

using teleposture::HumanModel;
using teleposture::JointVector;

/// Uniform posture inside the limit box.
inline JointVector random_posture(const HumanModel& model, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  JointVector q;
  for (int i = 0; i < teleposture::kNumJoints; ++i) {
    q[i] = model.limits_lo()[i] + u(rng) * model.range_of_motion()[i];
  }
  return q;
}

/// Posture near neutral, kept away from the limits.
inline JointVector posture_near_neutral(const HumanModel& model, std::mt19937_64& rng,
                                        double scale = 0.1) {
  std::normal_distribution<double> n(0.0, 1.0);
  JointVector q = model.neutral_posture();
  for (int i = 0; i < teleposture::kNumJoints; ++i) q[i] += scale * model.range_of_motion()[i] * n(rng);
  return teleposture::clamp_posture(model, q);
}

}  // namespace testing_support
