#include "teleposture/calib.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Dense>

#include "teleposture/errors.hpp"

namespace teleposture {

namespace {

constexpr const char* kModule = "calib";

struct RoutineInfo {
  CalibrationRoutine routine;
  const char* name;
  Joint joint;
};

constexpr std::array<RoutineInfo, 5> kRoutines = {{
    {CalibrationRoutine::kWristFlexion, "wrist_flexion", kWristFlexion},
    {CalibrationRoutine::kForearmRotation, "forearm_rotation", kShoulderInternalRotation},
    {CalibrationRoutine::kShoulderAbduction, "shoulder_abduction", kShoulderAbduction},
    {CalibrationRoutine::kHipRotation, "hip_rotation", kTorsoAxialRotation},
    {CalibrationRoutine::kHipLateralBend, "hip_lateral_bend", kTorsoLateralBend},
}};

const RoutineInfo& info(CalibrationRoutine routine) {
  for (const auto& r : kRoutines) {
    if (r.routine == routine) return r;
  }
  throw InputError(kModule, "unknown calibration routine");
}

// Angular extent of points around the origin of a 2D frame: 2 pi minus the
// widest empty gap between consecutive angles.
double arc_span_2d(const std::vector<Eigen::Vector2d>& pts, const Eigen::Vector2d& center) {
  std::vector<double> angles;
  angles.reserve(pts.size());
  for (const auto& p : pts) angles.push_back(std::atan2(p.y() - center.y(), p.x() - center.x()));
  std::sort(angles.begin(), angles.end());
  double widest = 2.0 * std::numbers::pi - (angles.back() - angles.front());
  for (std::size_t i = 1; i < angles.size(); ++i) widest = std::max(widest, angles[i] - angles[i - 1]);
  return 2.0 * std::numbers::pi - widest;
}

double safe_sqrt_diff(double a2, double b2, const char* what) {
  const double d = a2 - b2;
  if (d <= 0.0) {
    throw CalibrationError(kModule, std::string("inconsistent circle radii while solving ") + what);
  }
  return std::sqrt(d);
}

}  // namespace

std::string routine_name(CalibrationRoutine routine) { return info(routine).name; }

CalibrationRoutine parse_routine(std::string_view name) {
  for (const auto& r : kRoutines) {
    if (name == r.name) return r.routine;
  }
  throw InputError(kModule, "unknown calibration routine '" + std::string(name) + "'");
}

Joint routine_joint(CalibrationRoutine routine) { return info(routine).joint; }

CircleFit fit_circle_3d(const std::vector<Eigen::Vector3d>& points, const CalibrationOptions& opts) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 4) throw CalibrationError(kModule, "circle fit needs at least 4 points");
  for (const auto& p : points) {
    if (!p.allFinite()) throw InputError(kModule, "non-finite point in circle fit");
  }

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(n);
  Eigen::MatrixXd centered(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) centered.row(i) = (points[i] - centroid).transpose();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(1) <= 1e-9 * sv(0) || sv(1) < 1e-12) {
    throw CalibrationError(kModule, "points are collinear or coincident; rank-deficient circle fit");
  }
  const Eigen::Vector3d u = svd.matrixV().col(0);
  const Eigen::Vector3d v = svd.matrixV().col(1);
  Eigen::Vector3d normal = svd.matrixV().col(2).normalized();

  std::vector<Eigen::Vector2d> plane(points.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d d = points[i] - centroid;
    plane[i] = Eigen::Vector2d(d.dot(u), d.dot(v));
  }

  // Kasa: x^2 + y^2 + D x + E y + F = 0.
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = plane[i].x();
    a(i, 1) = plane[i].y();
    a(i, 2) = 1.0;
    b(i) = -plane[i].squaredNorm();
  }
  const Eigen::Vector3d sol = a.colPivHouseholderQr().solve(b);
  Eigen::Vector2d c(-0.5 * sol(0), -0.5 * sol(1));
  double r2 = c.squaredNorm() - sol(2);
  if (!(r2 > 0.0) || !std::isfinite(r2)) {
    throw CalibrationError(kModule, "algebraic circle fit failed");
  }
  double r = std::sqrt(r2);

  // Geometric refinement over (cx, cy, r).
  for (int iter = 0; iter < 50; ++iter) {
    Eigen::MatrixXd jac(n, 3);
    Eigen::VectorXd res(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Vector2d d = plane[i] - c;
      const double dist = d.norm();
      res(i) = dist - r;
      if (dist > 0.0) jac.block<1, 2>(i, 0) = -(d / dist).transpose();
      else jac.block<1, 2>(i, 0).setZero();
      jac(i, 2) = -1.0;
    }
    const Eigen::Vector3d delta = jac.colPivHouseholderQr().solve(-res);
    if (!delta.allFinite()) break;
    c += delta.head<2>();
    r += delta(2);
    if (delta.norm() < 1e-14 * std::max(1.0, r)) break;
  }
  if (!(r > 0.0) || !std::isfinite(r)) throw CalibrationError(kModule, "circle refinement diverged");

  CircleFit fit;
  fit.center = centroid + c.x() * u + c.y() * v;
  fit.radius = r;
  if (normal.z() < 0.0 || (normal.z() == 0.0 && normal.x() + normal.y() < 0.0)) normal = -normal;
  fit.plane_normal = normal;
  double sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d d = points[i] - fit.center;
    const double out_of_plane = d.dot(normal);
    const double in_plane = (d - out_of_plane * normal).norm() - r;
    sq += out_of_plane * out_of_plane + in_plane * in_plane;
  }
  fit.rms_residual = std::sqrt(sq / static_cast<double>(n));
  fit.arc_span = arc_span_2d(plane, c);
  if (fit.arc_span < opts.warn_arc_span) {
    fit.warning = "arc span " + std::to_string(fit.arc_span) +
                  " rad is short; circle fit is ill-conditioned";
  }
  return fit;
}

CircleFit fit_recording(const CalibrationRecording& recording, const CalibrationOptions& opts) {
  const std::string name = routine_name(recording.routine);
  if (recording.samples.size() < opts.min_samples) {
    throw CalibrationError(kModule, name + ": needs at least " + std::to_string(opts.min_samples) +
                                        " samples, got " + std::to_string(recording.samples.size()));
  }
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(recording.samples.size());
  for (const auto& s : recording.samples) pts.push_back(s.position);
  CircleFit fit;
  try {
    fit = fit_circle_3d(pts, opts);
  } catch (const CalibrationError& e) {
    throw CalibrationError(kModule, name + ": " + e.what());
  }
  if (fit.arc_span < opts.min_arc_span) {
    throw CalibrationError(kModule, name + ": arc span " + std::to_string(fit.arc_span) +
                                        " rad below minimum " + std::to_string(opts.min_arc_span));
  }
  if (fit.rms_residual > opts.max_rms_residual) {
    throw CalibrationError(kModule, name + ": fit rms residual " +
                                        std::to_string(fit.rms_residual) + " m exceeds " +
                                        std::to_string(opts.max_rms_residual) + " m");
  }
  return fit;
}

SegmentLengths estimate_segment_lengths(const std::vector<CalibrationRecording>& recordings,
                                        const HumanModel& model_template,
                                        const CalibrationOptions& opts) {
  const JointVector& neutral = model_template.neutral_posture();
  for (int j : {kTorsoFlexion, kTorsoLateralBend, kTorsoAxialRotation, kShoulderFlexion,
                kShoulderAbduction, kShoulderInternalRotation, kWristFlexion, kWristDeviation}) {
    if (std::abs(neutral[j]) > 1e-9) {
      throw CalibrationError(kModule, "calibration assumes a neutral posture with " +
                                          joint_names()[j] + " at zero");
    }
  }
  const double elbow = neutral[kElbowFlexion];

  std::map<CalibrationRoutine, double> radius;
  for (const auto& rec : recordings) {
    if (radius.count(rec.routine)) {
      throw CalibrationError(kModule, "duplicate recording for " + routine_name(rec.routine));
    }
    radius[rec.routine] = fit_recording(rec, opts).radius;
  }
  for (auto routine : kAllRoutines) {
    if (!radius.count(routine)) {
      throw CalibrationError(kModule, "incomplete calibration: missing " + routine_name(routine));
    }
  }

  SegmentLengths out;
  out.hand_len = radius[CalibrationRoutine::kWristFlexion];
  const double sin_e = std::sin(elbow);
  const double cos_e = std::cos(elbow);
  if (sin_e < 0.2) {
    throw CalibrationError(kModule, "elbow too straight at neutral for the forearm routine");
  }
  const double distal = radius[CalibrationRoutine::kForearmRotation] / sin_e;
  out.forearm_len = distal - out.hand_len;
  out.upper_arm_len = radius[CalibrationRoutine::kShoulderAbduction] - distal * cos_e;
  const double reach = distal * sin_e;
  const double r_hip = radius[CalibrationRoutine::kHipRotation];
  out.shoulder_offset = safe_sqrt_diff(r_hip * r_hip, reach * reach, "shoulder_offset");
  const double r_lat = radius[CalibrationRoutine::kHipLateralBend];
  const double drop = safe_sqrt_diff(r_lat * r_lat, out.shoulder_offset * out.shoulder_offset,
                                     "torso_len");
  out.torso_len = drop + out.upper_arm_len + distal * cos_e;
  try {
    out.validate();
  } catch (const InputError& e) {
    throw CalibrationError(kModule, std::string("implausible segment lengths: ") + e.what());
  }
  return out;
}

}  // namespace teleposture
