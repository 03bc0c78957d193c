#include "teleposture/model.hpp"

#include <algorithm>
#include <cmath>

#include "teleposture/errors.hpp"
#include "teleposture/io.hpp"
#include "teleposture/rotation.hpp"

namespace teleposture {

namespace {

constexpr const char* kModule = "model";

void require_finite(const JointVector& v, const char* what) {
  if (!v.allFinite()) throw InputError(kModule, std::string("non-finite ") + what);
}

JointLayout build_layout(const SegmentLengths& len, const JointVector& lo, const JointVector& hi) {
  JointLayout layout;
  layout.names = joint_names();
  const Eigen::Vector3d ux = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d uy = Eigen::Vector3d::UnitY();
  const Eigen::Vector3d uz = Eigen::Vector3d::UnitZ();
  layout.axes = {uy, ux, uz, -uy, -ux, uz, -uy, uz, ux, uy};
  for (auto& off : layout.parent_offsets) off.setZero();
  layout.parent_offsets[kShoulderFlexion] = Eigen::Vector3d(0.0, -len.shoulder_offset, len.torso_len);
  layout.parent_offsets[kElbowFlexion] = Eigen::Vector3d(0.0, 0.0, -len.upper_arm_len);
  layout.parent_offsets[kWristFlexion] = Eigen::Vector3d(0.0, 0.0, -len.forearm_len);
  layout.tool_offset = Eigen::Vector3d(0.0, 0.0, -len.hand_len);
  layout.limits_lo = lo;
  layout.limits_hi = hi;
  return layout;
}

}  // namespace

const std::array<std::string, kNumJoints>& joint_names() {
  static const std::array<std::string, kNumJoints> names = {
      "torso_flexion",     "torso_lateral_bend", "torso_axial_rotation",
      "shoulder_flexion",  "shoulder_abduction", "shoulder_internal_rotation",
      "elbow_flexion",     "forearm_pronation",  "wrist_flexion",
      "wrist_deviation"};
  return names;
}

int joint_index(std::string_view name) {
  const auto& names = joint_names();
  for (int i = 0; i < kNumJoints; ++i) {
    if (names[i] == name) return i;
  }
  throw InputError(kModule, "unknown joint '" + std::string(name) + "'");
}

void SegmentLengths::validate() const {
  const std::array<std::pair<const char*, double>, 5> fields = {{
      {"torso_len", torso_len},
      {"shoulder_offset", shoulder_offset},
      {"upper_arm_len", upper_arm_len},
      {"forearm_len", forearm_len},
      {"hand_len", hand_len},
  }};
  for (const auto& [name, value] : fields) {
    if (!std::isfinite(value) || value <= 0.0 || value >= 2.0) {
      throw InputError(kModule, std::string(name) + " must lie in (0, 2) m, got " +
                                    std::to_string(value));
    }
  }
}

SegmentLengths SegmentLengths::scaled(double s) const {
  return {torso_len * s, shoulder_offset * s, upper_arm_len * s, forearm_len * s, hand_len * s};
}

HumanModel::HumanModel(const SegmentLengths& lengths, const JointVector& limits_lo,
                       const JointVector& limits_hi, const JointVector& neutral,
                       const TaskSpacePose& base_pose)
    : lengths_(lengths), neutral_(neutral), base_pose_(base_pose) {
  lengths_.validate();
  require_finite(limits_lo, "lower joint limit");
  require_finite(limits_hi, "upper joint limit");
  require_finite(neutral, "neutral posture");
  for (int i = 0; i < kNumJoints; ++i) {
    if (!(limits_lo[i] < limits_hi[i])) {
      throw InputError(kModule, "empty limit range for " + joint_names()[i]);
    }
    if (neutral[i] < limits_lo[i] || neutral[i] > limits_hi[i]) {
      throw InputError(kModule, "neutral posture outside limits at " + joint_names()[i]);
    }
  }
  if (!base_pose.position.allFinite() || !base_pose.orientation.coeffs().allFinite() ||
      std::abs(base_pose.orientation.norm() - 1.0) > 1e-6) {
    throw InputError(kModule, "base pose must be finite with a unit quaternion");
  }
  base_pose_.orientation = canonical(base_pose.orientation);
  layout_ = build_layout(lengths_, limits_lo, limits_hi);
}

const HumanModel& HumanModel::default_model() {
  static const HumanModel model = bundled_default_model();
  return model;
}

HumanModel HumanModel::with_lengths(const SegmentLengths& lengths) const {
  return HumanModel(lengths, layout_.limits_lo, layout_.limits_hi, neutral_, base_pose_);
}

HumanModel HumanModel::with_base_pose(const TaskSpacePose& base_pose) const {
  return HumanModel(lengths_, layout_.limits_lo, layout_.limits_hi, neutral_, base_pose);
}

HumanModel HumanModel::with_neutral(const JointVector& neutral) const {
  return HumanModel(lengths_, layout_.limits_lo, layout_.limits_hi, neutral, base_pose_);
}

ChainFrames chain_frames(const HumanModel& model, const JointVector& q) {
  require_finite(q, "joint angles");
  const JointLayout& layout = model.layout();
  ChainFrames frames;
  Eigen::Matrix3d rot = model.base_pose().orientation.toRotationMatrix();
  Eigen::Vector3d pos = model.base_pose().position;
  for (int i = 0; i < kNumJoints; ++i) {
    pos += rot * layout.parent_offsets[i];
    frames.origins[i] = pos;
    frames.axes[i] = rot * layout.axes[i];
    rot = rot * Eigen::AngleAxisd(q[i], layout.axes[i]).toRotationMatrix();
  }
  frames.tool_position = pos + rot * layout.tool_offset;
  frames.tool_orientation = canonical(Eigen::Quaterniond(rot));
  return frames;
}

Jacobian jacobian(const ChainFrames& frames) {
  Jacobian jac;
  for (int i = 0; i < kNumJoints; ++i) {
    jac.block<3, 1>(0, i) = frames.axes[i].cross(frames.tool_position - frames.origins[i]);
    jac.block<3, 1>(3, i) = frames.axes[i];
  }
  return jac;
}

Jacobian jacobian(const HumanModel& model, const JointVector& q) {
  return jacobian(chain_frames(model, q));
}

Jacobian twist_sensitivity(const ChainFrames& frames, const JointVector& qdot) {
  // Joint k moves everything distal to it: axis_i' = axis_k x axis_i and
  // origin_i' = axis_k x (origin_i - origin_k) for k < i; the stylus point
  // always moves with axis_k x (p - origin_k).
  Jacobian out = Jacobian::Zero();
  const Eigen::Vector3d& p = frames.tool_position;
  for (int k = 0; k < kNumJoints; ++k) {
    const Eigen::Vector3d& wk = frames.axes[k];
    const Eigen::Vector3d dp = wk.cross(p - frames.origins[k]);
    Eigen::Vector3d dlin = Eigen::Vector3d::Zero();
    Eigen::Vector3d dang = Eigen::Vector3d::Zero();
    for (int i = 0; i < kNumJoints; ++i) {
      if (qdot[i] == 0.0) continue;
      const Eigen::Vector3d& wi = frames.axes[i];
      const Eigen::Vector3d lever = p - frames.origins[i];
      if (k < i) {
        const Eigen::Vector3d dwi = wk.cross(wi);
        dlin += qdot[i] * (dwi.cross(lever) + wi.cross(wk.cross(lever)));
        dang += qdot[i] * dwi;
      } else {
        dlin += qdot[i] * wi.cross(dp);
      }
    }
    out.block<3, 1>(0, k) = dlin;
    out.block<3, 1>(3, k) = dang;
  }
  return out;
}

std::pair<TaskSpacePose, TaskSpaceVelocity> forward_kinematics(const HumanModel& model,
                                                               const PostureState& state) {
  require_finite(state.qdot, "joint rates");
  const ChainFrames frames = chain_frames(model, state.q);
  const Eigen::Matrix<double, 6, 1> twist = jacobian(frames) * state.qdot;
  TaskSpacePose pose{frames.tool_position, frames.tool_orientation};
  TaskSpaceVelocity vel{twist.head<3>(), twist.tail<3>()};
  return {pose, vel};
}

TaskSpacePose stylus_pose(const HumanModel& model, const JointVector& q) {
  const ChainFrames frames = chain_frames(model, q);
  return {frames.tool_position, frames.tool_orientation};
}

JointVector clamp_posture(const HumanModel& model, const JointVector& q) {
  return q.cwiseMax(model.limits_lo()).cwiseMin(model.limits_hi());
}

bool within_limits(const HumanModel& model, const JointVector& q, double tol) {
  return ((q - model.limits_lo()).array() >= -tol).all() &&
         ((model.limits_hi() - q).array() >= -tol).all();
}

}  // namespace teleposture
