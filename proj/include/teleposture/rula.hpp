#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "teleposture/filter.hpp"
#include "teleposture/model.hpp"

namespace teleposture {

/// Task-level inputs RULA needs that joint angles cannot provide. Defaults:
/// seated operator, intermittent load under 2 kg, muscle use below 4x per
/// minute, neck and trunk upright and untwisted, legs supported.
struct RulaAssumptions {
  bool seated = true;
  double load_kg = 1.0;
  bool muscle_use_high_freq = false;
  bool neck_twisted = false;
  /// Score the trunk as upright and untwisted regardless of the torso joints.
  bool trunk_vertical_override = true;
  bool legs_supported = true;
};

struct RulaScore {
  int upper_arm = 1;
  int lower_arm = 1;
  int wrist = 1;
  int wrist_twist = 1;
  int neck = 1;
  int trunk = 1;
  int legs = 1;
  int table_a = 1;
  int table_b = 1;
  /// Table scores plus muscle-use and force/load modifiers.
  int score_a = 1;
  int score_b = 1;
  int table_c = 1;
  int grand = 1;
  int action_level = 1;

  bool operator==(const RulaScore&) const = default;
};

/// Worksheet tables and angle thresholds (data/rula_tables.json).
struct RulaTables {
  double upper_arm_extension_deg = 20.0;
  std::array<double, 3> upper_arm_flexion_deg{20.0, 45.0, 90.0};
  double upper_arm_abduction_deg = 45.0;
  std::array<double, 2> lower_arm_band_deg{60.0, 100.0};
  double wrist_neutral_deg = 5.0;
  double wrist_bent_deg = 15.0;
  double wrist_deviation_deg = 10.0;
  double wrist_twist_end_deg = 60.0;
  double trunk_upright_deg = 5.0;
  std::array<double, 2> trunk_flexion_deg{20.0, 60.0};
  double trunk_side_bend_deg = 10.0;
  double trunk_twist_deg = 10.0;
  int neck_fixed_score = 1;
  /// [upper arm 1-6][lower arm 1-3][(wrist 1-4, twist 1-2) -> 8 columns]
  std::array<std::array<std::array<int, 8>, 3>, 6> table_a{};
  /// [neck 1-6][(trunk 1-6, legs 1-2) -> 12 columns]
  std::array<std::array<int, 12>, 6> table_b{};
  /// [score A 1-8+][score B 1-7+]
  std::array<std::array<int, 7>, 8> table_c{};
  /// Upper grand-score bound of action levels 1..4.
  std::array<int, 4> action_level_max{2, 4, 6, 7};

  static const RulaTables& bundled();
  static RulaTables from_json(const nlohmann::json& j);
};

int action_level(int grand, const RulaTables& tables = RulaTables::bundled());

RulaScore score_posture(const JointVector& q, const RulaAssumptions& assume,
                        const RulaTables& tables = RulaTables::bundled());

struct RulaDistribution {
  double expected = 0.0;
  double std = 0.0;
  /// Probability mass of grand scores 1..7.
  std::array<double, 7> histogram{};
};

/// Weighted statistics of the grand score over a normalized particle set.
RulaDistribution score_distribution(const ParticleSet& ps, const RulaAssumptions& assume,
                                    const RulaTables& tables = RulaTables::bundled());

/// Record with the largest grand score; earliest index on ties. Throws
/// InputError for an empty trajectory.
RulaScore max_score(std::span<const RulaScore> trajectory);
std::size_t max_score_index(std::span<const RulaScore> trajectory);

}  // namespace teleposture
