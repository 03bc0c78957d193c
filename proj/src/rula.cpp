#include "teleposture/rula.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "embedded_data.hpp"
#include "teleposture/errors.hpp"

namespace teleposture {

namespace {

constexpr const char* kModule = "rula";

double deg(double rad) { return rad * 180.0 / std::numbers::pi; }

template <std::size_t N>
std::array<double, N> read_array(const nlohmann::json& j, const char* key) {
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != N) throw ConfigError(kModule, std::string("wrong length for ") + key);
  std::array<double, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

int score_upper_arm(const JointVector& q, const RulaTables& t) {
  const double flex = deg(q[kShoulderFlexion]);
  int s;
  if (flex < -t.upper_arm_extension_deg) s = 2;
  else if (flex <= t.upper_arm_flexion_deg[0]) s = 1;
  else if (flex <= t.upper_arm_flexion_deg[1]) s = 2;
  else if (flex <= t.upper_arm_flexion_deg[2]) s = 3;
  else s = 4;
  if (deg(q[kShoulderAbduction]) > t.upper_arm_abduction_deg) s += 1;
  return std::clamp(s, 1, 6);
}

int score_lower_arm(const JointVector& q, const RulaTables& t) {
  const double elbow = deg(q[kElbowFlexion]);
  return (elbow >= t.lower_arm_band_deg[0] && elbow <= t.lower_arm_band_deg[1]) ? 1 : 2;
}

int score_wrist(const JointVector& q, const RulaTables& t) {
  const double flex = std::abs(deg(q[kWristFlexion]));
  int s = flex <= t.wrist_neutral_deg ? 1 : (flex <= t.wrist_bent_deg ? 2 : 3);
  if (std::abs(deg(q[kWristDeviation])) > t.wrist_deviation_deg) s += 1;
  return std::clamp(s, 1, 4);
}

int score_wrist_twist(const JointVector& q, const RulaTables& t) {
  return std::abs(deg(q[kForearmPronation])) > t.wrist_twist_end_deg ? 2 : 1;
}

int score_trunk(const JointVector& q, const RulaAssumptions& a, const RulaTables& t) {
  if (a.trunk_vertical_override) return 1;
  const double flex = deg(q[kTorsoFlexion]);
  int s;
  if (std::abs(flex) <= t.trunk_upright_deg) s = 1;
  else if (flex < 0.0) s = 2;
  else if (flex <= t.trunk_flexion_deg[0]) s = 2;
  else if (flex <= t.trunk_flexion_deg[1]) s = 3;
  else s = 4;
  if (std::abs(deg(q[kTorsoLateralBend])) > t.trunk_side_bend_deg) s += 1;
  if (std::abs(deg(q[kTorsoAxialRotation])) > t.trunk_twist_deg) s += 1;
  return std::clamp(s, 1, 6);
}

int force_load_score(const RulaAssumptions& a) {
  if (a.load_kg < 2.0) return 0;
  if (a.load_kg < 10.0) return a.muscle_use_high_freq ? 2 : 1;
  return 3;
}

}  // namespace

RulaTables RulaTables::from_json(const nlohmann::json& j) {
  try {
    RulaTables t;
    const auto& ua = j.at("upper_arm");
    t.upper_arm_extension_deg = ua.at("extension_threshold_deg").get<double>();
    t.upper_arm_flexion_deg = read_array<3>(ua, "flexion_thresholds_deg");
    t.upper_arm_abduction_deg = ua.at("abduction_modifier_deg").get<double>();
    t.lower_arm_band_deg = read_array<2>(j.at("lower_arm"), "neutral_band_deg");
    const auto& wr = j.at("wrist");
    t.wrist_neutral_deg = wr.at("neutral_band_deg").get<double>();
    t.wrist_bent_deg = wr.at("bent_threshold_deg").get<double>();
    t.wrist_deviation_deg = wr.at("deviation_modifier_deg").get<double>();
    t.wrist_twist_end_deg = j.at("wrist_twist").at("end_of_range_deg").get<double>();
    const auto& tr = j.at("trunk");
    t.trunk_upright_deg = tr.at("upright_band_deg").get<double>();
    t.trunk_flexion_deg = read_array<2>(tr, "flexion_thresholds_deg");
    t.trunk_side_bend_deg = tr.at("side_bend_modifier_deg").get<double>();
    t.trunk_twist_deg = tr.at("twist_modifier_deg").get<double>();
    t.neck_fixed_score = j.at("neck_fixed_score").get<int>();

    const auto a = j.at("table_a").get<std::vector<std::vector<std::vector<int>>>>();
    if (a.size() != 6) throw ConfigError(kModule, "table_a needs 6 upper-arm rows");
    for (std::size_t u = 0; u < 6; ++u) {
      if (a[u].size() != 3) throw ConfigError(kModule, "table_a needs 3 lower-arm rows");
      for (std::size_t l = 0; l < 3; ++l) {
        if (a[u][l].size() != 8) throw ConfigError(kModule, "table_a rows need 8 columns");
        std::copy(a[u][l].begin(), a[u][l].end(), t.table_a[u][l].begin());
      }
    }
    const auto b = j.at("table_b").get<std::vector<std::vector<int>>>();
    if (b.size() != 6) throw ConfigError(kModule, "table_b needs 6 neck rows");
    for (std::size_t n = 0; n < 6; ++n) {
      if (b[n].size() != 12) throw ConfigError(kModule, "table_b rows need 12 columns");
      std::copy(b[n].begin(), b[n].end(), t.table_b[n].begin());
    }
    const auto c = j.at("table_c").get<std::vector<std::vector<int>>>();
    if (c.size() != 8) throw ConfigError(kModule, "table_c needs 8 rows");
    for (std::size_t r = 0; r < 8; ++r) {
      if (c[r].size() != 7) throw ConfigError(kModule, "table_c rows need 7 columns");
      std::copy(c[r].begin(), c[r].end(), t.table_c[r].begin());
    }
    const auto& levels = j.at("action_levels");
    if (levels.size() != 4) throw ConfigError(kModule, "expected 4 action levels");
    for (std::size_t i = 0; i < 4; ++i) t.action_level_max[i] = levels[i].at("max_grand").get<int>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(kModule, std::string("malformed RULA tables: ") + e.what());
  }
}

const RulaTables& RulaTables::bundled() {
  static const RulaTables tables = from_json(nlohmann::json::parse(embedded::kRulaTablesJson));
  return tables;
}

int action_level(int grand, const RulaTables& tables) {
  for (int i = 0; i < 4; ++i) {
    if (grand <= tables.action_level_max[i]) return i + 1;
  }
  return 4;
}

RulaScore score_posture(const JointVector& q, const RulaAssumptions& assume,
                        const RulaTables& tables) {
  if (!q.allFinite()) throw InputError(kModule, "non-finite posture");
  RulaScore s;
  s.upper_arm = score_upper_arm(q, tables);
  s.lower_arm = score_lower_arm(q, tables);
  s.wrist = score_wrist(q, tables);
  s.wrist_twist = score_wrist_twist(q, tables);
  s.neck = std::clamp(tables.neck_fixed_score + (assume.neck_twisted ? 1 : 0), 1, 6);
  s.trunk = score_trunk(q, assume, tables);
  s.legs = assume.legs_supported ? 1 : 2;

  s.table_a = tables.table_a[s.upper_arm - 1][s.lower_arm - 1][(s.wrist - 1) * 2 + (s.wrist_twist - 1)];
  s.table_b = tables.table_b[s.neck - 1][(s.trunk - 1) * 2 + (s.legs - 1)];
  const int muscle = assume.muscle_use_high_freq ? 1 : 0;
  const int force = force_load_score(assume);
  s.score_a = s.table_a + muscle + force;
  s.score_b = s.table_b + muscle + force;
  s.table_c = tables.table_c[std::min(s.score_a, 8) - 1][std::min(s.score_b, 7) - 1];
  s.grand = std::clamp(s.table_c, 1, 7);
  s.action_level = action_level(s.grand, tables);
  return s;
}

RulaDistribution score_distribution(const ParticleSet& ps, const RulaAssumptions& assume,
                                    const RulaTables& tables) {
  RulaDistribution d;
  if (ps.size() == 0) throw InputError(kModule, "empty particle set");
  std::vector<int> grands(ps.size());
  std::vector<double> weights(ps.size());
  for (std::size_t k = 0; k < ps.size(); ++k) {
    grands[k] = score_posture(ps.states[k].q, assume, tables).grand;
    weights[k] = std::exp(ps.log_weights[k]);
    d.expected += weights[k] * grands[k];
    d.histogram[static_cast<std::size_t>(grands[k] - 1)] += weights[k];
  }
  double var = 0.0;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    const double diff = grands[k] - d.expected;
    var += weights[k] * diff * diff;
  }
  d.std = std::sqrt(std::max(var, 0.0));
  return d;
}

std::size_t max_score_index(std::span<const RulaScore> trajectory) {
  if (trajectory.empty()) throw InputError(kModule, "max_score of an empty trajectory");
  std::size_t best = 0;
  for (std::size_t k = 1; k < trajectory.size(); ++k) {
    if (trajectory[k].grand > trajectory[best].grand) best = k;
  }
  return best;
}

RulaScore max_score(std::span<const RulaScore> trajectory) {
  return trajectory[max_score_index(trajectory)];
}

}  // namespace teleposture
