#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "teleposture/dynamics.hpp"
#include "teleposture/likelihood.hpp"
#include "teleposture/model.hpp"

namespace teleposture {

/// Weights of the trajectory least-squares objective
///   sum_t ||phi(x_t) - z_t||^2_{Sigma1} + ||x_t - f(x_{t-1})||^2_{Sigma2}
/// with x_t = [q_t; qdot_t] and f the deterministic constant-velocity step.
/// Sigma2 is built from the acceleration rate: qdot block rate * dt, q block
/// rate * dt^3. The first step is anchored to the neutral posture with
/// standard deviation prior_scale * ROM and to zero velocity.
struct IkConfig {
  Vector12 sigma1 = ObservationNoise::standard().variances();
  JointVector accel_rate = default_accel_rate();
  double prior_scale = 0.2;
  int max_iters = 100;
  /// Converged when the accepted step's infinity norm falls below tol.
  double tol = 1e-10;
  /// Starts per online step: the warm start plus restarts - 1 perturbed seeds.
  int restarts = 3;
  double restart_scale = 0.05;
  std::uint64_t seed = 0;
  double initial_radius = 0.5;
  /// Per-step pull towards the neutral posture with standard deviation
  /// comfort_scale * range of motion; 0 disables it. Resolves the arm's
  /// redundancy in favour of relaxed postures.
  double comfort_scale = 0.0;
  /// Offline only: use dense normal equations (requires at most 200 steps).
  bool dense = false;

  void validate() const;

  /// Tight observation weights for near-exact tracking (synthetic ground truth).
  static IkConfig tracking();
};

struct IkStepDiagnostics {
  std::size_t step = 0;
  int iterations = 0;
  double cost = 0.0;
  bool converged = false;
};

struct IkResult {
  std::vector<PostureState> states;
  std::vector<IkStepDiagnostics> diagnostics;
  /// Steps (online) or the whole problem (offline, index 0) that hit max_iters.
  std::vector<std::size_t> flagged;
  /// Full trajectory objective of `states`.
  double objective = 0.0;
  int iterations = 0;
};

/// Per-step bounded IK warm-started from the previous solution.
IkResult online_ik(std::span<const StylusObservation> traj, const HumanModel& model,
                   const IkConfig& cfg);

/// Whole-trajectory bounded IK starting from `init`.
IkResult offline_traj_ik(std::span<const StylusObservation> traj, const HumanModel& model,
                         const IkConfig& cfg, const std::vector<PostureState>& init);

/// Objective value (sum of squared whitened residuals) of a trajectory.
double trajectory_objective(std::span<const StylusObservation> traj, const HumanModel& model,
                            const IkConfig& cfg, const std::vector<PostureState>& states);

// Residuals of one step, exposed for derivative checks.
namespace ik_detail {

using StepVector = Eigen::Matrix<double, 20, 1>;

/// Whitened observation residual (12) for state x at one observation.
Eigen::Matrix<double, 12, 1> observation_residual(const HumanModel& model, const IkConfig& cfg,
                                                  const StylusObservation& obs,
                                                  const StepVector& x);
Eigen::Matrix<double, 12, 20> observation_jacobian(const HumanModel& model, const IkConfig& cfg,
                                                   const StylusObservation& obs,
                                                   const StepVector& x);

/// Whitened motion residual (20) of x against its predecessor over dt.
StepVector motion_residual(const IkConfig& cfg, const StepVector& prev, const StepVector& x,
                           double dt);

}  // namespace ik_detail

}  // namespace teleposture
