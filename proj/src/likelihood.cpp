#include "teleposture/likelihood.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "teleposture/errors.hpp"
#include "teleposture/rotation.hpp"

namespace teleposture {

ObservationNoise::ObservationNoise(const Vector12& variances) : variances_(variances) {
  if (!variances.allFinite() || (variances.array() <= 0.0).any()) {
    throw ConfigError("likelihood", "kinematic covariance must have finite positive diagonal");
  }
  log_normalizer_ = -0.5 * (variances.array() * 2.0 * std::numbers::pi).log().sum();
}

ObservationNoise ObservationNoise::standard() {
  Vector12 v;
  v << 0.001, 0.001, 0.001, 0.05, 0.05, 0.05, 1.0, 1.0, 1.0, 10.0, 10.0, 10.0;
  return ObservationNoise(0.01 * v);
}

ObservationNoise ObservationNoise::with_pose_entries(double position, double orientation) {
  Vector12 v = standard().variances();
  v.head<3>().setConstant(position);
  v.segment<3>(3).setConstant(orientation);
  return ObservationNoise(v);
}

ObservationNoise ObservationNoise::inflated() { return with_pose_entries(0.1, 0.5); }

double ObservationNoise::mahalanobis_sq(const Residual& r) const {
  return (r.array().square() / variances_.array()).sum();
}

Residual innovation(const HumanModel& model, const PostureState& state,
                    const StylusObservation& obs) {
  const auto [pose, vel] = forward_kinematics(model, state);
  Residual r;
  r.segment<3>(0) = pose.position - obs.pose.position;
  r.segment<3>(3) = rotation_difference(pose.orientation, obs.pose.orientation);
  r.segment<3>(6) = vel.linear - obs.velocity.linear;
  r.segment<3>(9) = vel.angular - obs.velocity.angular;
  return r;
}

double log_weight(const Residual& residual, const ObservationNoise& noise, double validity) {
  if (!(validity >= 0.0 && validity <= 1.0)) {
    throw InputError("likelihood", "validity must lie in [0, 1]");
  }
  if (validity == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(validity) + noise.log_normalizer() - 0.5 * noise.mahalanobis_sq(residual);
}

namespace {

// 1 for x <= -1, 0 for x >= 1, C1 smoothstep in between, 0.5 at 0.
double ramp(double x) {
  if (x <= -1.0) return 1.0;
  if (x >= 1.0) return 0.0;
  const double s = 0.5 * (x + 1.0);
  return 1.0 - s * s * (3.0 - 2.0 * s);
}

}  // namespace

double box_validity(const HumanModel& model, const JointVector& q, double margin) {
  if (margin <= 0.0) return within_limits(model, q) ? 1.0 : 0.0;
  double v = 1.0;
  for (int i = 0; i < kNumJoints; ++i) {
    v *= ramp((q[i] - model.limits_hi()[i]) / margin);
    v *= ramp((model.limits_lo()[i] - q[i]) / margin);
    if (v == 0.0) break;
  }
  return v;
}

ValidityFn make_box_validity(const HumanModel& model, double margin) {
  return [model, margin](const JointVector& q) { return box_validity(model, q, margin); };
}

ValidityFn no_validity() {
  return [](const JointVector&) { return 1.0; };
}

}  // namespace teleposture
