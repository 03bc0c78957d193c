#pragma once

#include <functional>

#include <Eigen/Core>

#include "teleposture/model.hpp"

namespace teleposture {

/// Residual layout: position [0,3), orientation rotation vector [3,6),
/// linear velocity [6,9), angular velocity [9,12).
using Residual = Eigen::Matrix<double, 12, 1>;
using Vector12 = Eigen::Matrix<double, 12, 1>;

/// Diagonal kinematic covariance over the residual layout.
class ObservationNoise {
 public:
  /// Throws ConfigError unless every variance is finite and > 0.
  explicit ObservationNoise(const Vector12& variances);

  /// 0.01 * diag(0.001 x3, 0.05 x3, 1 x3, 10 x3).
  static ObservationNoise standard();

  /// standard() with the position and orientation variances set to the
  /// given values; the velocity entries are kept.
  static ObservationNoise with_pose_entries(double position, double orientation);

  /// Wide pose variances (0.1 position, 0.5 orientation) that keep several
  /// posture modes alive after a uniform initialization.
  static ObservationNoise inflated();

  const Vector12& variances() const { return variances_; }
  /// -0.5 * log det(2 pi Sigma).
  double log_normalizer() const { return log_normalizer_; }
  /// r^T Sigma^-1 r.
  double mahalanobis_sq(const Residual& r) const;

 private:
  Vector12 variances_;
  double log_normalizer_;
};

/// Posture validity in [0, 1]. Must be deterministic.
using ValidityFn = std::function<double(const JointVector&)>;

/// predicted - observed, see Residual for the layout.
Residual innovation(const HumanModel& model, const PostureState& state,
                    const StylusObservation& obs);

/// log(v_p) - 0.5 log det(2 pi Sigma) - 0.5 r^T Sigma^-1 r; -inf when v_p == 0.
double log_weight(const Residual& residual, const ObservationNoise& noise, double validity);

/// Product over joints of a smoothstep ramp centred on each limit: 1 at
/// margin inside, 0.5 on the limit, 0 at margin outside. margin == 0 gives
/// the indicator of the closed limit box.
double box_validity(const HumanModel& model, const JointVector& q, double margin);

/// Binds box_validity to a model and margin. The model is copied.
ValidityFn make_box_validity(const HumanModel& model, double margin);

/// Always 1; used when validity weighting is disabled.
ValidityFn no_validity();

}  // namespace teleposture
