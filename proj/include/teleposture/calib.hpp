#pragma once

// Circle-point analysis of single-joint calibration motions.
//
// Every routine starts from the neutral posture: torso, shoulder and wrist
// joints at zero, elbow flexed by theta (pi/2 by default) and the forearm in
// any pronation. Sweeping one joint moves the stylus on a circle whose
// radius relates to the segment lengths as follows (e = forearm + hand):
//
//   wrist_flexion       r = hand
//   forearm_rotation    r = e sin(theta)            (upper-arm axial rotation)
//   shoulder_abduction  r = upper_arm + e cos(theta)
//   hip_rotation        r^2 = (e sin(theta))^2 + shoulder^2
//   hip_lateral_bend    r^2 = shoulder^2 + (torso - upper_arm - e cos(theta))^2
//
// Lengths are solved in that order so each step only uses distal results.
// The lateral-bend relation has two roots; the one with the shoulder above
// the elbow at neutral (torso > upper_arm + e cos(theta)) is taken.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "teleposture/model.hpp"

namespace teleposture {

enum class CalibrationRoutine {
  kWristFlexion,
  kForearmRotation,
  kShoulderAbduction,
  kHipRotation,
  kHipLateralBend,
};

inline constexpr std::array<CalibrationRoutine, 5> kAllRoutines = {
    CalibrationRoutine::kWristFlexion, CalibrationRoutine::kForearmRotation,
    CalibrationRoutine::kShoulderAbduction, CalibrationRoutine::kHipRotation,
    CalibrationRoutine::kHipLateralBend};

std::string routine_name(CalibrationRoutine routine);
CalibrationRoutine parse_routine(std::string_view name);

/// The joint a routine sweeps.
Joint routine_joint(CalibrationRoutine routine);

struct CalibrationSample {
  double t = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

struct CalibrationRecording {
  CalibrationRoutine routine = CalibrationRoutine::kWristFlexion;
  std::vector<CalibrationSample> samples;
};

struct CircleFit {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.0;
  Eigen::Vector3d plane_normal = Eigen::Vector3d::UnitZ();
  /// RMS of the 3D distance from each point to the fitted circle.
  double rms_residual = 0.0;
  /// Angle (rad) subtended by the points around the center.
  double arc_span = 0.0;
  /// Set when the arc is short enough that the fit is ill-conditioned.
  std::optional<std::string> warning;
};

struct CalibrationOptions {
  double min_arc_span = 0.349066;     // 20 deg, hard floor
  double warn_arc_span = 0.785398;    // 45 deg
  double max_rms_residual = 0.01;     // m
  std::size_t min_samples = 10;
};

/// Plane by total least squares, algebraic (Kasa) circle in the plane, then
/// Gauss-Newton refinement of the geometric distance. Throws
/// CalibrationError for fewer than 4 points or (near-)collinear points.
CircleFit fit_circle_3d(const std::vector<Eigen::Vector3d>& points,
                        const CalibrationOptions& opts = {});

/// Circle fit of one recording with sample-count and arc-span checks.
CircleFit fit_recording(const CalibrationRecording& recording, const CalibrationOptions& opts = {});

/// Solves the five segment lengths from the five routines (any order).
/// The template supplies the elbow angle of the neutral posture.
SegmentLengths estimate_segment_lengths(const std::vector<CalibrationRecording>& recordings,
                                        const HumanModel& model_template,
                                        const CalibrationOptions& opts = {});

}  // namespace teleposture
