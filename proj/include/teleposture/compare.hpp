#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <json.hpp>

#include "teleposture/io.hpp"
#include "teleposture/rula.hpp"

namespace teleposture {

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Linear-interpolation quartiles (the usual "type 7" definition).
/// Throws InputError on an empty sample.
Quartiles quartiles(std::vector<double> values);

struct RulaAgreement {
  /// Fraction of steps with equal grand score / equal action level.
  double same_grand_rate = 0.0;
  double same_action_level_rate = 0.0;
  /// Among reference steps with grand > 2, the fraction the estimate also
  /// scores above 2. 1 when the reference has no such step.
  double high_score_recall = 1.0;
  std::size_t high_score_steps = 0;
  int max_grand_estimate = 1;
  int max_grand_reference = 1;
  int max_action_level_estimate = 1;
  int max_action_level_reference = 1;
};

struct ComparisonReport {
  std::size_t steps = 0;
  std::array<Quartiles, kNumJoints> per_joint{};
  Quartiles pooled;
  double pooled_mean = 0.0;
  RulaAgreement rula;
};

/// Absolute per-joint deviations between two posture trajectories of equal
/// length and matching timestamps (within 1e-6 s), plus RULA agreement.
ComparisonReport compare_postures(const PostureTrajectory& estimate,
                                  const PostureTrajectory& reference,
                                  const RulaAssumptions& assume = {});

nlohmann::ordered_json report_to_json(const ComparisonReport& report);

}  // namespace teleposture
