#include "teleposture/rotation.hpp"

#include <cmath>

namespace teleposture {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Quaterniond canonical(const Eigen::Quaterniond& q) {
  Eigen::Quaterniond out = q.normalized();
  if (out.w() < 0.0) out.coeffs() = -out.coeffs();
  return out;
}

Eigen::Vector3d log_map(const Eigen::Quaterniond& q_in) {
  const Eigen::Quaterniond q = canonical(q_in);
  const Eigen::Vector3d v = q.vec();
  const double n = v.norm();
  if (n < 1e-12) {
    // atan2(n, w) / n -> 1 / w for small angles
    return 2.0 * v / q.w();
  }
  const double angle = 2.0 * std::atan2(n, q.w());
  return (angle / n) * v;
}

Eigen::Quaterniond exp_map(const Eigen::Vector3d& rotvec) {
  const double angle = rotvec.norm();
  if (angle < 1e-12) {
    Eigen::Quaterniond q(1.0, 0.5 * rotvec.x(), 0.5 * rotvec.y(), 0.5 * rotvec.z());
    return q.normalized();
  }
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, rotvec / angle));
}

Eigen::Vector3d rotation_difference(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  return log_map(a * b.conjugate());
}

Eigen::Matrix3d left_jacobian_inverse(const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  const Eigen::Matrix3d k = skew(phi);
  if (theta < 1e-6) {
    return Eigen::Matrix3d::Identity() - 0.5 * k + (1.0 / 12.0) * k * k;
  }
  const double half = 0.5 * theta;
  const double coeff = (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
  return Eigen::Matrix3d::Identity() - 0.5 * k + coeff * k * k;
}

}  // namespace teleposture
