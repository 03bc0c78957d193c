#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "teleposture/rotation.hpp"

using namespace teleposture;

TEST_CASE("skew matrix reproduces the cross product") {
  const Eigen::Vector3d a(0.3, -1.2, 2.0), b(-0.7, 0.4, 1.1);
  CHECK((skew(a) * b - a.cross(b)).norm() < 1e-15);
}

TEST_CASE("log of a quarter turn about z") {
  const Eigen::Quaterniond q(Eigen::AngleAxisd(std::numbers::pi / 2, Eigen::Vector3d::UnitZ()));
  const Eigen::Vector3d v = log_map(q);
  CHECK(v.x() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(v.z() == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
}

TEST_CASE("log and exp are inverse, including the double cover") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    Eigen::Vector3d v(n(rng), n(rng), n(rng));
    if (v.norm() > 3.0) v *= 3.0 / v.norm();
    const Eigen::Quaterniond q = exp_map(v);
    CHECK((log_map(q) - v).norm() < 1e-12);
    const Eigen::Quaterniond flipped(-q.w(), -q.x(), -q.y(), -q.z());
    CHECK((log_map(flipped) - v).norm() < 1e-12);
  }
  CHECK(log_map(Eigen::Quaterniond::Identity()).norm() == 0.0);
  CHECK(exp_map(Eigen::Vector3d::Zero()).w() == 1.0);
}

TEST_CASE("canonical quaternions are unit norm with w >= 0") {
  const Eigen::Quaterniond c = canonical(Eigen::Quaterniond(-2.0, 0.0, 1.0, 0.0));
  CHECK(c.w() > 0.0);
  CHECK(c.norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rotation difference is expressed in the world frame") {
  const Eigen::Quaterniond b(Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()));
  const Eigen::Vector3d delta(0.05, -0.02, 0.1);
  const Eigen::Quaterniond a = exp_map(delta) * b;
  CHECK((rotation_difference(a, b) - delta).norm() < 1e-14);
}

TEST_CASE("left Jacobian inverse matches a finite-difference derivative of the log") {
  const Eigen::Vector3d phi(0.4, -0.9, 0.3);
  const Eigen::Matrix3d jinv = left_jacobian_inverse(phi);
  const double h = 1e-7;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d e = Eigen::Vector3d::Unit(i) * h;
    const Eigen::Vector3d fd = (log_map(exp_map(e) * exp_map(phi)) - log_map(exp_map(-e) * exp_map(phi))) / (2 * h);
    CHECK((fd - jinv.col(i)).norm() < 1e-7);
  }
  CHECK((left_jacobian_inverse(Eigen::Vector3d::Zero()) - Eigen::Matrix3d::Identity()).norm() < 1e-15);
}
