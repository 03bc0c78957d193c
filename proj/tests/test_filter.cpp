#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "teleposture/filter.hpp"
#include "teleposture/synth.hpp"

using namespace teleposture;

namespace {

StylusObservation observe(const HumanModel& m, const PostureState& s, double t) {
  const auto [pose, vel] = forward_kinematics(m, s);
  return {t, pose, vel};
}

double weight_sum(const std::vector<double>& lw) {
  double s = 0.0;
  for (double v : lw) s += std::exp(v);
  return s;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("initial cloud respects the limit box") {
  const HumanModel& m = HumanModel::default_model();
  FilterConfig cfg;
  cfg.particles = 10000;
  for (InitMode mode : {InitMode::kNeutral, InitMode::kUniform}) {
    cfg.init = mode;
    Rng rng(1);
    const ParticleSet ps = initialize(m, cfg, rng);
    CHECK(ps.size() == 10000);
    for (const auto& s : ps.states) {
      CHECK(within_limits(m, s.q));
      CHECK(s.qdot.isZero(0.0));
    }
    CHECK(std::abs(weight_sum(ps.log_weights) - 1.0) < 1e-9);
  }
}

TEST_CASE("zero initial spread puts every particle at neutral") {
  const HumanModel& m = HumanModel::default_model();
  FilterConfig cfg;
  cfg.sigma0_scale = 0.0;
  Rng rng(2);
  for (const auto& s : initialize(m, cfg, rng).states) CHECK(s.q == m.neutral_posture());
}

TEST_CASE("normalization and ESS") {
  std::vector<double> lw{std::log(1.0), std::log(3.0), -std::numeric_limits<double>::infinity(),
                         std::log(4.0)};
  const double total = normalize_log_weights(lw);
  CHECK(total == doctest::Approx(std::log(8.0)));
  CHECK(weight_sum(lw) == doctest::Approx(1.0).epsilon(1e-12));
  // weights 1/8, 3/8, 0, 4/8 -> 1 / (1 + 9 + 16) * 64
  CHECK(effective_sample_size(lw) == doctest::Approx(64.0 / 26.0));

  std::vector<double> uniform(10, std::log(0.1));
  CHECK(effective_sample_size(uniform) == doctest::Approx(10.0));

  std::vector<double> dead(3, -std::numeric_limits<double>::infinity());
  CHECK(normalize_log_weights(dead) == -std::numeric_limits<double>::infinity());

  std::vector<double> huge{-1e6, -1e6 - 1.0};
  normalize_log_weights(huge);
  CHECK(weight_sum(huge) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("systematic resampling follows the weights") {
  std::vector<double> lw{std::log(0.5), std::log(0.25), std::log(0.25), -INFINITY};
  Rng rng(4);
  const auto parents = systematic_resample(lw, rng);
  CHECK(parents.size() == 4);
  CHECK(std::count(parents.begin(), parents.end(), 0u) == 2);
  CHECK(std::count(parents.begin(), parents.end(), 1u) == 1);
  CHECK(std::count(parents.begin(), parents.end(), 2u) == 1);
  CHECK(std::count(parents.begin(), parents.end(), 3u) == 0);
}

TEST_CASE("resampling preserves the weighted mean in expectation") {
  constexpr int kParticles = 200;
  constexpr int kReps = 200;
  Rng rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> values(kParticles), lw(kParticles);
  for (int i = 0; i < kParticles; ++i) {
    values[static_cast<std::size_t>(i)] = u(rng) * 2.0 - 1.0;
    lw[static_cast<std::size_t>(i)] = std::log(u(rng) + 1e-3);
  }
  normalize_log_weights(lw);
  double target = 0.0;
  for (int i = 0; i < kParticles; ++i) {
    target += std::exp(lw[static_cast<std::size_t>(i)]) * values[static_cast<std::size_t>(i)];
  }
  std::vector<double> means;
  for (int r = 0; r < kReps; ++r) {
    double s = 0.0;
    for (std::size_t p : systematic_resample(lw, rng)) s += values[p];
    means.push_back(s / kParticles);
  }
  const double avg = std::accumulate(means.begin(), means.end(), 0.0) / kReps;
  double var = 0.0;
  for (double v : means) var += (v - avg) * (v - avg);
  const double sd = std::sqrt(var / (kReps - 1));
  CHECK(std::abs(avg - target) <= 3.0 * sd / std::sqrt(double(kReps)) + 1e-12);
}

TEST_CASE("noiseless observation of a particle's own state makes it the MAP") {
  const HumanModel& m = HumanModel::default_model();
  FilterConfig cfg;
  cfg.particles = 300;
  cfg.accel_rate.setZero();
  ParticleFilter pf(m, cfg);
  const std::size_t chosen = 117;
  const PostureState target = pf.particles().states[chosen];
  const PostureEstimate est = pf.step(observe(m, target, 0.0));
  CHECK(est.map_state.q == target.q);
}

TEST_CASE("filter contract on a short circular task") {
  const HumanModel& m = HumanModel::default_model();
  SyntheticTask task;
  task.kind = TaskKind::kCircle;
  task.duration = 4.0;
  task.rate = 50.0;
  task.noise_variance = noise_variances(0.002, 0.01, 0.01, 0.05);
  task.seed = 3;
  const SyntheticData data = generate_task(m, task);

  FilterConfig cfg;
  cfg.seed = 99;
  ParticleFilter pf(m, cfg);
  std::vector<double> abduction_std;
  for (const auto& obs : data.observations) {
    const PostureEstimate est = pf.step(obs);
    CHECK(within_limits(m, est.map_state.q));
    CHECK(std::abs(weight_sum(pf.particles().log_weights) - 1.0) < 1e-9);
    CHECK(pf.particles().ess <= static_cast<double>(cfg.particles) + 1e-9);
    if (est.resampled) CHECK(pf.particles().ess == static_cast<double>(cfg.particles));
    abduction_std.push_back(est.std_q[kShoulderAbduction]);
  }

  // Convergence trend over the first 20 steps: the late mean is well below the start.
  const double initial = 0.2 * m.range_of_motion()[kShoulderAbduction];
  double late = 0.0;
  for (std::size_t k = 15; k < 20; ++k) late += abduction_std[k] / 5.0;
  CHECK(late < 0.5 * initial);

  // Determinism under a fixed seed.
  const auto a = run_filter(data.observations, m, cfg, make_box_validity(m, cfg.validity_margin));
  const auto b = run_filter(data.observations, m, cfg, make_box_validity(m, cfg.validity_margin));
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].map_state.q == b[k].map_state.q);
    CHECK(a[k].mean_q == b[k].mean_q);
    CHECK(a[k].ess == b[k].ess);
  }
}

TEST_CASE("posture recovery on a 200-step reaching trajectory") {
  const HumanModel& m = HumanModel::default_model();
  SyntheticTask task;
  task.kind = TaskKind::kLineX;
  task.duration = 3.98;
  task.rate = 50.0;
  task.noise_variance = noise_variances(0.002, 0.01, 0.01, 0.05);
  task.seed = 12;
  const SyntheticData data = generate_task(m, task);
  REQUIRE(data.observations.size() == 200);
  FilterConfig cfg;
  cfg.seed = 5;
  const auto est = run_filter(data.observations, m, cfg, make_box_validity(m, cfg.validity_margin));
  std::vector<double> dev;
  for (std::size_t k = 0; k < est.size(); ++k) {
    for (int i = 0; i < kNumJoints; ++i) {
      dev.push_back(std::abs(est[k].map_state.q[i] - data.truth[k].q[i]));
    }
  }
  const double med = median(dev);
  MESSAGE("median per-joint deviation: " << med << " rad");
  CHECK(med < 0.1);
}

TEST_CASE("edge cases of a run") {
  const HumanModel& m = HumanModel::default_model();
  FilterConfig cfg;
  cfg.particles = 100;
  ParticleFilter pf(m, cfg);
  CHECK(pf.run({}).empty());

  const PostureState s{m.neutral_posture(), JointVector::Zero()};
  const auto one = ParticleFilter(m, cfg).run(std::vector<StylusObservation>{observe(m, s, 0.0)});
  REQUIRE(one.size() == 1);
  CHECK(within_limits(m, one[0].map_state.q));

  std::vector<StylusObservation> dup{observe(m, s, 0.0), observe(m, s, 0.1), observe(m, s, 0.1)};
  try {
    ParticleFilter(m, cfg).run(dup);
    FAIL("expected an ordering error");
  } catch (const OrderingError& e) {
    CHECK(e.index() == 2);
  }
}

TEST_CASE("vanishing weights raise with the last valid estimate") {
  const HumanModel& m = HumanModel::default_model();
  FilterConfig cfg;
  cfg.particles = 50;
  int calls = 0;
  // Valid for the first step's particles only, then nothing is valid.
  ValidityFn validity = [&](const JointVector&) { return calls++ < 50 ? 1.0 : 0.0; };
  ParticleFilter pf(m, cfg, validity);
  const PostureState s{m.neutral_posture(), JointVector::Zero()};
  pf.step(observe(m, s, 0.0));
  try {
    pf.step(observe(m, s, 0.02));
    FAIL("expected a degenerate filter error");
  } catch (const DegenerateFilterError& e) {
    REQUIRE(e.last_valid().has_value());
    CHECK(e.last_valid()->timestamp == 0.0);
  }
  CHECK_FALSE(pf.events().empty());
}

TEST_CASE("configuration validation") {
  FilterConfig cfg;
  cfg.particles = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.resample_threshold = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.sigma0_scale = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
