#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace teleposture {

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Flips the quaternion so that w >= 0 and normalizes it.
Eigen::Quaterniond canonical(const Eigen::Quaterniond& q);

/// Rotation vector (axis * angle, angle in [0, pi]) of a unit quaternion.
Eigen::Vector3d log_map(const Eigen::Quaterniond& q);

Eigen::Quaterniond exp_map(const Eigen::Vector3d& rotvec);

/// Geodesic orientation error log(a * b^-1), expressed in the world frame.
Eigen::Vector3d rotation_difference(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

/// Inverse of the left Jacobian of SO(3): maps a small world-frame rotation
/// applied on the left of exp(phi) to the induced change of phi.
Eigen::Matrix3d left_jacobian_inverse(const Eigen::Vector3d& phi);

}  // namespace teleposture
