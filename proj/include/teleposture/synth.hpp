#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "teleposture/calib.hpp"
#include "teleposture/ik.hpp"
#include "teleposture/likelihood.hpp"
#include "teleposture/model.hpp"

namespace teleposture {

enum class TaskKind {
  kLineX,         // repeated reach along x
  kLineY,         // repeated sweep along y
  kCircle,        // horizontal circle, radius 0.1 m
  kTwoBlocks,     // random sides of two blocks at different heights, hand rotation
  kStatic,        // hold the neutral posture
  kCustomSpline,  // smooth random joint-space motion (no IK involved)
};

std::string task_name(TaskKind kind);
TaskKind parse_task(std::string_view name);

struct SyntheticTask {
  TaskKind kind = TaskKind::kCircle;
  double duration = 30.0;  // s
  double rate = 50.0;      // Hz
  /// Per-component observation noise variances (same layout as Residual); zero for none.
  Vector12 noise_variance = Vector12::Zero();
  std::uint64_t seed = 0;

  void validate() const;
};

/// Variances for per-axis standard deviations of each residual block.
Vector12 noise_variances(double position_sd, double orientation_sd, double linear_sd,
                         double angular_sd);

struct SyntheticData {
  /// Ground-truth joint trajectory.
  std::vector<PostureState> truth;
  /// Noiseless stylus trajectory FK(truth).
  std::vector<StylusObservation> clean;
  /// clean plus seeded noise (equal to clean when the noise is zero).
  std::vector<StylusObservation> observations;
  /// Largest distance between the commanded hand path and FK(truth).
  double max_tracking_error = 0.0;
};

/// Commanded stylus path (pose and velocity) of a hand-space task. Starts at
/// the neutral stylus pose at rest.
std::vector<StylusObservation> task_path(const HumanModel& model, const SyntheticTask& task);

/// Ground truth by trajectory IK of the commanded path (online IK, then
/// offline refinement), observations as FK(truth) plus noise. Throws
/// GenerationError naming the first waypoint the chain cannot track within
/// `tolerance` metres.
SyntheticData generate_task(const HumanModel& model, const SyntheticTask& task,
                            double tolerance = 0.002);

/// Single-joint sweep of the routine's joint around neutral by +-arc/2 over
/// one back-and-forth cycle. `noise_m` is the RMS magnitude of an isotropic
/// 3D position perturbation. Throws InputError if the sweep leaves the limits.
CalibrationRecording generate_calibration(const HumanModel& model, CalibrationRoutine routine,
                                          double arc_deg, double noise_m, std::uint64_t seed,
                                          std::size_t samples = 120, double duration = 6.0);

}  // namespace teleposture
