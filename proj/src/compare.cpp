#include "teleposture/compare.hpp"

#include <algorithm>
#include <cmath>

#include "teleposture/errors.hpp"

namespace teleposture {

namespace {

constexpr const char* kModule = "compare";

nlohmann::ordered_json quartiles_json(const Quartiles& q) {
  return {{"q1", q.q1}, {"median", q.median}, {"q3", q.q3}};
}

}  // namespace

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) throw InputError(kModule, "quartiles of an empty sample");
  std::sort(values.begin(), values.end());
  auto at = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {at(0.25), at(0.5), at(0.75)};
}

ComparisonReport compare_postures(const PostureTrajectory& estimate,
                                  const PostureTrajectory& reference,
                                  const RulaAssumptions& assume) {
  const std::size_t n = estimate.states.size();
  if (n == 0) throw InputError(kModule, "empty trajectories");
  if (reference.states.size() != n) {
    throw InputError(kModule, "trajectories differ in length (" + std::to_string(n) + " vs " +
                                  std::to_string(reference.states.size()) + ")");
  }
  if (estimate.t.size() == n && reference.t.size() == n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(estimate.t[k] - reference.t[k]) > 1e-6) {
        throw InputError(kModule, "timestamps differ at sample " + std::to_string(k));
      }
    }
  }

  ComparisonReport report;
  report.steps = n;
  std::vector<double> pooled;
  pooled.reserve(n * kNumJoints);
  std::array<std::vector<double>, kNumJoints> per_joint;
  std::size_t same_grand = 0, same_level = 0, high = 0, recalled = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const JointVector d = (estimate.states[k].q - reference.states[k].q).cwiseAbs();
    for (int i = 0; i < kNumJoints; ++i) {
      per_joint[static_cast<std::size_t>(i)].push_back(d[i]);
      pooled.push_back(d[i]);
    }
    const RulaScore a = score_posture(estimate.states[k].q, assume);
    const RulaScore b = score_posture(reference.states[k].q, assume);
    same_grand += a.grand == b.grand;
    same_level += a.action_level == b.action_level;
    if (b.grand > 2) {
      ++high;
      recalled += a.grand > 2;
    }
    report.rula.max_grand_estimate = std::max(report.rula.max_grand_estimate, a.grand);
    report.rula.max_grand_reference = std::max(report.rula.max_grand_reference, b.grand);
  }
  for (int i = 0; i < kNumJoints; ++i) {
    report.per_joint[static_cast<std::size_t>(i)] = quartiles(per_joint[static_cast<std::size_t>(i)]);
  }
  double sum = 0.0;
  for (double v : pooled) sum += v;
  report.pooled_mean = sum / static_cast<double>(pooled.size());
  report.pooled = quartiles(std::move(pooled));

  const double steps = static_cast<double>(n);
  report.rula.same_grand_rate = static_cast<double>(same_grand) / steps;
  report.rula.same_action_level_rate = static_cast<double>(same_level) / steps;
  report.rula.high_score_steps = high;
  report.rula.high_score_recall = high ? static_cast<double>(recalled) / static_cast<double>(high) : 1.0;
  report.rula.max_action_level_estimate = action_level(report.rula.max_grand_estimate);
  report.rula.max_action_level_reference = action_level(report.rula.max_grand_reference);
  return report;
}

nlohmann::ordered_json report_to_json(const ComparisonReport& report) {
  nlohmann::ordered_json joints;
  for (int i = 0; i < kNumJoints; ++i) {
    joints[joint_names()[static_cast<std::size_t>(i)]] =
        quartiles_json(report.per_joint[static_cast<std::size_t>(i)]);
  }
  nlohmann::ordered_json j;
  j["format_version"] = kFormatVersion;
  j["steps"] = report.steps;
  j["deviation_rad"] = {{"per_joint", joints},
                        {"pooled", quartiles_json(report.pooled)},
                        {"pooled_mean", report.pooled_mean}};
  const RulaAgreement& r = report.rula;
  j["rula"] = {{"same_grand_rate", r.same_grand_rate},
               {"same_action_level_rate", r.same_action_level_rate},
               {"high_score_recall", r.high_score_recall},
               {"high_score_steps", r.high_score_steps},
               {"max_grand_estimate", r.max_grand_estimate},
               {"max_grand_reference", r.max_grand_reference},
               {"max_action_level_estimate", r.max_action_level_estimate},
               {"max_action_level_reference", r.max_action_level_reference}};
  return j;
}

}  // namespace teleposture
