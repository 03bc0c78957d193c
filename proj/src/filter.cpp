#include "teleposture/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace teleposture {

namespace {

constexpr const char* kModule = "filter";
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double truncated_normal(double mean, double sd, double lo, double hi, Rng& rng) {
  if (sd <= 0.0) return std::clamp(mean, lo, hi);
  std::normal_distribution<double> normal(mean, sd);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double x = normal(rng);
    if (x >= lo && x <= hi) return x;
  }
  // Only reachable for a mean far outside the box.
  return std::clamp(mean, lo, hi);
}

}  // namespace

void FilterConfig::validate() const {
  if (particles <= 0) throw ConfigError(kModule, "particle count must be positive");
  if (!(sigma0_scale >= 0.0) || !std::isfinite(sigma0_scale)) {
    throw ConfigError(kModule, "sigma0_scale must be finite and >= 0");
  }
  if (!(resample_threshold > 0.0 && resample_threshold <= 1.0)) {
    throw ConfigError(kModule, "resample_threshold must lie in (0, 1]");
  }
  if (!accel_rate.allFinite() || (accel_rate.array() < 0.0).any()) {
    throw ConfigError(kModule, "acceleration covariance rate must be finite and >= 0");
  }
  if (!(validity_margin >= 0.0)) throw ConfigError(kModule, "validity_margin must be >= 0");
  if (!(reinject_fraction > 0.0 && reinject_fraction <= 1.0)) {
    throw ConfigError(kModule, "reinject_fraction must lie in (0, 1]");
  }
}

ParticleSet initialize_around(const HumanModel& model, const FilterConfig& cfg,
                              const JointVector& mean, Rng& rng) {
  cfg.validate();
  const JointVector& lo = model.limits_lo();
  const JointVector& hi = model.limits_hi();
  const JointVector sd = cfg.sigma0_scale * model.range_of_motion();
  const auto m = static_cast<std::size_t>(cfg.particles);

  ParticleSet ps;
  ps.states.resize(m);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& s : ps.states) {
    for (int i = 0; i < kNumJoints; ++i) {
      s.q[i] = cfg.init == InitMode::kUniform ? lo[i] + unit(rng) * (hi[i] - lo[i])
                                              : truncated_normal(mean[i], sd[i], lo[i], hi[i], rng);
    }
    s.qdot.setZero();
  }
  ps.log_weights.assign(m, -std::log(static_cast<double>(m)));
  ps.ess = static_cast<double>(m);
  return ps;
}

ParticleSet initialize(const HumanModel& model, const FilterConfig& cfg, Rng& rng) {
  return initialize_around(model, cfg, model.neutral_posture(), rng);
}

double normalize_log_weights(std::vector<double>& log_weights) {
  const double max_lw = *std::max_element(log_weights.begin(), log_weights.end());
  if (max_lw == kNegInf || std::isnan(max_lw)) return kNegInf;
  double sum = 0.0;
  for (double lw : log_weights) sum += std::exp(lw - max_lw);
  // Shift by the maximum first: subtracting the full total from large
  // log-weights would cancel most significant digits.
  const double log_sum = std::log(sum);
  for (double& lw : log_weights) lw = (lw - max_lw) - log_sum;
  return max_lw + log_sum;
}

double effective_sample_size(std::span<const double> log_weights) {
  double sum_sq = 0.0;
  for (double lw : log_weights) sum_sq += std::exp(2.0 * lw);
  return sum_sq > 0.0 ? 1.0 / sum_sq : 0.0;
}

std::vector<std::size_t> systematic_resample(std::span<const double> log_weights, Rng& rng) {
  const std::size_t m = log_weights.size();
  std::vector<std::size_t> parents(m);
  if (m == 0) return parents;
  const double step = 1.0 / static_cast<double>(m);
  std::uniform_real_distribution<double> offset(0.0, step);
  const double u0 = offset(rng);
  std::size_t i = 0;
  double cumulative = std::exp(log_weights[0]);
  for (std::size_t k = 0; k < m; ++k) {
    const double u = u0 + static_cast<double>(k) * step;
    while (u > cumulative && i + 1 < m) {
      ++i;
      cumulative += std::exp(log_weights[i]);
    }
    parents[k] = i;
  }
  return parents;
}

PostureEstimate summarize(const ParticleSet& ps, double timestamp) {
  PostureEstimate est;
  est.timestamp = timestamp;
  est.ess = ps.ess;
  std::size_t best = 0;
  JointVector mean = JointVector::Zero();
  for (std::size_t k = 0; k < ps.size(); ++k) {
    if (ps.log_weights[k] > ps.log_weights[best]) best = k;
    mean += std::exp(ps.log_weights[k]) * ps.states[k].q;
  }
  JointVector var = JointVector::Zero();
  for (std::size_t k = 0; k < ps.size(); ++k) {
    var += std::exp(ps.log_weights[k]) * (ps.states[k].q - mean).array().square().matrix();
  }
  est.map_state = ps.states[best];
  est.mean_q = mean;
  est.std_q = var.cwiseMax(0.0).cwiseSqrt();
  return est;
}

void check_time_ordering(std::span<const StylusObservation> observations, const char* module) {
  for (std::size_t k = 0; k < observations.size(); ++k) {
    if (!std::isfinite(observations[k].t)) {
      throw InputError(module, "sample " + std::to_string(k) + ": non-finite timestamp");
    }
    if (k > 0 && !(observations[k].t > observations[k - 1].t)) {
      throw OrderingError(module, k, "timestamps must be strictly increasing");
    }
  }
}

ParticleFilter::ParticleFilter(HumanModel model, FilterConfig cfg, ValidityFn validity)
    : model_(std::move(model)), cfg_(std::move(cfg)), validity_(std::move(validity)),
      rng_(cfg_.seed) {
  cfg_.validate();
  if (!validity_) validity_ = no_validity();
  particles_ = initialize(model_, cfg_, rng_);
}

ParticleFilter::ParticleFilter(HumanModel model, FilterConfig cfg)
    : ParticleFilter(model, cfg, make_box_validity(model, cfg.validity_margin)) {}

void ParticleFilter::reinject(const StylusObservation& obs) {
  const JointVector center = last_ ? last_->mean_q : model_.neutral_posture();
  FilterConfig prior_cfg = cfg_;
  prior_cfg.init = InitMode::kNeutral;
  const std::size_t m = particles_.size();
  const auto count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(cfg_.reinject_fraction * static_cast<double>(m))));
  prior_cfg.particles = static_cast<int>(count);
  const ParticleSet fresh = initialize_around(model_, prior_cfg, center, rng_);
  const std::size_t stride = m / count;
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t k = j * stride;
    particles_.states[k] = fresh.states[j];
    const double v = validity_(particles_.states[k].q);
    particles_.log_weights[k] =
        log_weight(innovation(model_, particles_.states[k], obs), cfg_.obs_noise, v);
  }
  events_.push_back({steps_, obs.t,
                     "all weights vanished; re-injected " + std::to_string(count) +
                         " particles around the last valid mean"});
}

PostureEstimate ParticleFilter::step(const StylusObservation& obs) {
  if (!std::isfinite(obs.t)) throw InputError(kModule, "non-finite timestamp");
  std::optional<MotionNoise> noise;
  if (particles_.time) {
    const double dt = obs.t - *particles_.time;
    if (!(dt > 0.0)) {
      throw OrderingError(kModule, steps_, "timestamps must be strictly increasing");
    }
    noise = motion_noise_for_step(cfg_.accel_rate, dt);
    for (auto& s : particles_.states) s = propagate_within_limits(model_, s, *noise, rng_);
  }

  for (std::size_t k = 0; k < particles_.size(); ++k) {
    const PostureState& s = particles_.states[k];
    const double v = validity_(s.q);
    particles_.log_weights[k] += log_weight(innovation(model_, s, obs), cfg_.obs_noise, v);
  }

  if (normalize_log_weights(particles_.log_weights) == kNegInf) {
    reinject(obs);
    if (normalize_log_weights(particles_.log_weights) == kNegInf) {
      throw DegenerateFilterError("all particle weights vanished at t=" + std::to_string(obs.t),
                                  last_);
    }
  }

  particles_.ess = effective_sample_size(particles_.log_weights);
  PostureEstimate est = summarize(particles_, obs.t);

  const double m = static_cast<double>(particles_.size());
  if (particles_.ess < cfg_.resample_threshold * m) {
    const auto parents = systematic_resample(particles_.log_weights, rng_);
    std::vector<PostureState> next;
    next.reserve(parents.size());
    for (std::size_t p : parents) next.push_back(particles_.states[p]);
    particles_.states = std::move(next);
    particles_.log_weights.assign(particles_.size(), -std::log(m));
    particles_.ess = m;
    est.resampled = true;
  }

  particles_.time = obs.t;
  last_ = est;
  ++steps_;
  return est;
}

std::vector<PostureEstimate> ParticleFilter::run(std::span<const StylusObservation> observations) {
  check_time_ordering(observations, kModule);
  std::vector<PostureEstimate> out;
  out.reserve(observations.size());
  for (const auto& obs : observations) out.push_back(step(obs));
  return out;
}

std::vector<PostureEstimate> run_filter(std::span<const StylusObservation> observations,
                                        const HumanModel& model, const FilterConfig& cfg,
                                        const ValidityFn& validity) {
  ParticleFilter pf(model, cfg, validity);
  return pf.run(observations);
}

}  // namespace teleposture
