#include <doctest.h>

#include "teleposture/compare.hpp"
#include "teleposture/errors.hpp"

using namespace teleposture;

namespace {

PostureTrajectory constant_trajectory(const JointVector& q, std::size_t n) {
  PostureTrajectory t;
  for (std::size_t k = 0; k < n; ++k) {
    t.t.push_back(0.02 * static_cast<double>(k));
    t.states.push_back({q, JointVector::Zero()});
  }
  return t;
}

}  // namespace

TEST_CASE("type 7 quartiles") {
  const Quartiles q = quartiles({4.0, 1.0, 3.0, 2.0, 5.0});
  CHECK(q.q1 == 2.0);
  CHECK(q.median == 3.0);
  CHECK(q.q3 == 4.0);
  const Quartiles e = quartiles({1.0, 2.0, 3.0, 4.0});
  CHECK(e.q1 == doctest::Approx(1.75));
  CHECK(e.median == doctest::Approx(2.5));
  CHECK(e.q3 == doctest::Approx(3.25));
  CHECK(quartiles({7.0}).median == 7.0);
  CHECK_THROWS_AS(quartiles({}), InputError);
}

TEST_CASE("deviation report is symmetric and exact on offsets") {
  const JointVector n = HumanModel::default_model().neutral_posture();
  JointVector shifted = n;
  shifted[kShoulderFlexion] += 0.2;
  const auto a = constant_trajectory(n, 10), b = constant_trajectory(shifted, 10);
  const ComparisonReport ab = compare_postures(a, b), ba = compare_postures(b, a);
  CHECK(ab.per_joint[kShoulderFlexion].median == doctest::Approx(0.2));
  CHECK(ab.per_joint[kElbowFlexion].q3 == 0.0);
  CHECK(ab.pooled.median == 0.0);
  CHECK(ab.pooled_mean == doctest::Approx(0.02));
  CHECK(report_to_json(ab).dump() == report_to_json(ba).dump());
  CHECK(ab.rula.same_grand_rate == 1.0);
  CHECK(ab.rula.high_score_recall == 1.0);
}

TEST_CASE("RULA agreement counts high-score steps") {
  const JointVector n = HumanModel::default_model().neutral_posture();
  JointVector raised = n;
  raised[kShoulderFlexion] = 1.75;
  raised[kWristFlexion] = 0.35;
  auto ref = constant_trajectory(n, 4);
  ref.states[1].q = raised;
  ref.states[2].q = raised;
  auto est = constant_trajectory(n, 4);
  est.states[1].q = raised;
  const ComparisonReport r = compare_postures(est, ref);
  CHECK(r.rula.high_score_steps == 2);
  CHECK(r.rula.high_score_recall == 0.5);
  CHECK(r.rula.same_grand_rate == 0.75);
  CHECK(r.rula.max_grand_reference == 3);
  CHECK(r.rula.max_action_level_estimate == 2);
}

TEST_CASE("mismatched trajectories are rejected") {
  const JointVector n = HumanModel::default_model().neutral_posture();
  CHECK_THROWS_AS(compare_postures(constant_trajectory(n, 3), constant_trajectory(n, 4)), InputError);
  auto shifted = constant_trajectory(n, 3);
  shifted.t[1] += 0.01;
  CHECK_THROWS_AS(compare_postures(constant_trajectory(n, 3), shifted), InputError);
}
