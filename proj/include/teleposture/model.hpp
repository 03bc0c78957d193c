#pragma once

// Seated 10-DOF upper-body chain (torso + right arm) ending at the stylus
// interaction point.
//
// Frames: the chair frame sits at the hip joint center with x forward,
// y to the operator's left and z up. In the zero configuration the torso is
// upright, the arm hangs along -z with the palm facing the body (+y) and the
// hand continues the forearm. Joint order and axes (parent frame):
//
//   0 torso_flexion               +y   forward bend positive
//   1 torso_lateral_bend          +x
//   2 torso_axial_rotation        +z
//   3 shoulder_flexion            -y   arm raised forward positive
//   4 shoulder_abduction          -x   arm raised sideways positive
//   5 shoulder_internal_rotation  +z
//   6 elbow_flexion               -y
//   7 forearm_pronation           +z
//   8 wrist_flexion               +x   toward the palm positive
//   9 wrist_deviation             +y   ulnar positive
//
// Segment offsets: torso_len along +z then shoulder_offset along -y to the
// shoulder center, upper_arm_len along -z to the elbow, forearm_len along -z
// to the wrist and hand_len along -z to the stylus point.

#include <array>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace teleposture {

inline constexpr int kNumJoints = 10;

using JointVector = Eigen::Matrix<double, kNumJoints, 1>;
using Jacobian = Eigen::Matrix<double, 6, kNumJoints>;

enum Joint : int {
  kTorsoFlexion = 0,
  kTorsoLateralBend,
  kTorsoAxialRotation,
  kShoulderFlexion,
  kShoulderAbduction,
  kShoulderInternalRotation,
  kElbowFlexion,
  kForearmPronation,
  kWristFlexion,
  kWristDeviation,
};

const std::array<std::string, kNumJoints>& joint_names();

/// Index of a joint by name; throws InputError for unknown names.
int joint_index(std::string_view name);

struct SegmentLengths {
  double torso_len = 0.0;
  double shoulder_offset = 0.0;
  double upper_arm_len = 0.0;
  double forearm_len = 0.0;
  double hand_len = 0.0;

  /// Throws InputError unless every length is in (0, 2) m.
  void validate() const;

  SegmentLengths scaled(double s) const;
};

struct JointLayout {
  std::array<std::string, kNumJoints> names;
  std::array<Eigen::Vector3d, kNumJoints> axes;
  /// Translation from the previous joint frame to this joint's origin.
  std::array<Eigen::Vector3d, kNumJoints> parent_offsets;
  /// Translation from the last joint frame to the stylus point.
  Eigen::Vector3d tool_offset = Eigen::Vector3d::Zero();
  JointVector limits_lo = JointVector::Zero();
  JointVector limits_hi = JointVector::Zero();
};

struct PostureState {
  JointVector q = JointVector::Zero();
  JointVector qdot = JointVector::Zero();
};

struct TaskSpacePose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

struct TaskSpaceVelocity {
  Eigen::Vector3d linear = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular = Eigen::Vector3d::Zero();
};

/// One leader-robot sample: stylus pose and spatial velocity at time t.
struct StylusObservation {
  double t = 0.0;
  TaskSpacePose pose;
  TaskSpaceVelocity velocity;
};

/// Immutable kinematic model. Safe to share across threads.
class HumanModel {
 public:
  HumanModel(const SegmentLengths& lengths, const JointVector& limits_lo,
             const JointVector& limits_hi, const JointVector& neutral,
             const TaskSpacePose& base_pose);

  /// Bundled 50th-percentile defaults (data/default_model.json).
  static const HumanModel& default_model();

  const SegmentLengths& lengths() const { return lengths_; }
  const JointLayout& layout() const { return layout_; }
  const TaskSpacePose& base_pose() const { return base_pose_; }
  const JointVector& neutral_posture() const { return neutral_; }
  const JointVector& limits_lo() const { return layout_.limits_lo; }
  const JointVector& limits_hi() const { return layout_.limits_hi; }
  JointVector range_of_motion() const { return layout_.limits_hi - layout_.limits_lo; }

  HumanModel with_lengths(const SegmentLengths& lengths) const;
  HumanModel with_base_pose(const TaskSpacePose& base_pose) const;
  HumanModel with_neutral(const JointVector& neutral) const;

 private:
  SegmentLengths lengths_;
  JointLayout layout_;
  JointVector neutral_;
  TaskSpacePose base_pose_;
};

/// World-frame joint origins/axes and the stylus frame for one posture.
struct ChainFrames {
  std::array<Eigen::Vector3d, kNumJoints> origins;
  std::array<Eigen::Vector3d, kNumJoints> axes;
  Eigen::Vector3d tool_position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond tool_orientation = Eigen::Quaterniond::Identity();
};

ChainFrames chain_frames(const HumanModel& model, const JointVector& q);

/// Stylus pose in the robot frame and its spatial velocity J(q) * qdot.
std::pair<TaskSpacePose, TaskSpaceVelocity> forward_kinematics(const HumanModel& model,
                                                               const PostureState& state);

/// Stylus pose only.
TaskSpacePose stylus_pose(const HumanModel& model, const JointVector& q);

/// Geometric Jacobian at the stylus point: rows (linear; angular), world frame.
Jacobian jacobian(const HumanModel& model, const JointVector& q);
Jacobian jacobian(const ChainFrames& frames);

/// d(J(q) qdot)/dq, the sensitivity of the stylus twist to the joint angles
/// at fixed joint rates.
Jacobian twist_sensitivity(const ChainFrames& frames, const JointVector& qdot);

/// Element-wise projection onto the joint-limit box.
JointVector clamp_posture(const HumanModel& model, const JointVector& q);

bool within_limits(const HumanModel& model, const JointVector& q, double tol = 0.0);

}  // namespace teleposture
