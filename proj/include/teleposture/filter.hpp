#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "teleposture/dynamics.hpp"
#include "teleposture/errors.hpp"
#include "teleposture/likelihood.hpp"
#include "teleposture/model.hpp"

namespace teleposture {

enum class InitMode {
  kNeutral,  // truncated normal around the neutral posture
  kUniform,  // uniform over the joint-limit box
};

struct FilterConfig {
  int particles = 500;
  /// Initial standard deviation per joint as a fraction of its range of motion.
  double sigma0_scale = 0.2;
  /// Acceleration covariance rate; the per-step covariance is rate * dt.
  JointVector accel_rate = default_accel_rate();
  ObservationNoise obs_noise = ObservationNoise::standard();
  /// Resample when ESS < resample_threshold * particles.
  double resample_threshold = 0.5;
  std::uint64_t seed = 0;
  InitMode init = InitMode::kNeutral;
  /// Width of the box-validity ramp (rad).
  double validity_margin = 0.05;
  /// Fraction of particles re-drawn from the prior when every weight vanishes.
  double reinject_fraction = 0.1;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
};

struct ParticleSet {
  std::vector<PostureState> states;
  /// Normalized: sum(exp(log_weights)) == 1.
  std::vector<double> log_weights;
  double ess = 0.0;
  /// Time of the last absorbed observation.
  std::optional<double> time;

  std::size_t size() const { return states.size(); }
};

struct PostureEstimate {
  double timestamp = 0.0;
  PostureState map_state;  // highest-weight particle
  JointVector mean_q = JointVector::Zero();
  JointVector std_q = JointVector::Zero();
  double ess = 0.0;
  bool resampled = false;
};

/// Raised when every particle weight is -inf even after re-injection.
class DegenerateFilterError : public Error {
 public:
  DegenerateFilterError(const std::string& what, std::optional<PostureEstimate> last)
      : Error("filter", what), last_valid_(std::move(last)) {}

  const std::optional<PostureEstimate>& last_valid() const { return last_valid_; }

 private:
  std::optional<PostureEstimate> last_valid_;
};

struct FilterEvent {
  std::size_t step = 0;
  double timestamp = 0.0;
  std::string message;
};

/// Initial particle cloud: truncated normal N(mean, (sigma0_scale * ROM)^2)
/// clipped to the limit box (or uniform over the box), zero velocities,
/// uniform weights.
ParticleSet initialize(const HumanModel& model, const FilterConfig& cfg, Rng& rng);
ParticleSet initialize_around(const HumanModel& model, const FilterConfig& cfg,
                              const JointVector& mean, Rng& rng);

/// Shifts log-weights so that they sum to one in linear space; returns the
/// log of the pre-normalization total (-inf if all weights vanished).
double normalize_log_weights(std::vector<double>& log_weights);

/// 1 / sum(w^2) for normalized log-weights.
double effective_sample_size(std::span<const double> log_weights);

/// Systematic (low-variance) resampling: one uniform offset, M evenly spaced
/// pointers. Returns the parent index of each new particle.
std::vector<std::size_t> systematic_resample(std::span<const double> log_weights, Rng& rng);

/// Weighted moments and the MAP particle of a normalized set.
PostureEstimate summarize(const ParticleSet& ps, double timestamp);

/// Recursive estimator. Owns its particle set and random stream.
class ParticleFilter {
 public:
  ParticleFilter(HumanModel model, FilterConfig cfg, ValidityFn validity);
  /// Uses the box validity surrogate with cfg.validity_margin.
  ParticleFilter(HumanModel model, FilterConfig cfg);

  /// Absorbs one observation: propagate, weight, normalize, maybe resample.
  /// Throws OrderingError if obs.t does not increase.
  PostureEstimate step(const StylusObservation& obs);

  /// Batch form: one estimate per observation. Validates ordering first.
  std::vector<PostureEstimate> run(std::span<const StylusObservation> observations);

  const ParticleSet& particles() const { return particles_; }
  const std::vector<FilterEvent>& events() const { return events_; }
  std::size_t steps_taken() const { return steps_; }
  const HumanModel& model() const { return model_; }
  const FilterConfig& config() const { return cfg_; }

 private:
  void reinject(const StylusObservation& obs);

  HumanModel model_;
  FilterConfig cfg_;
  ValidityFn validity_;
  Rng rng_;
  ParticleSet particles_;
  std::optional<PostureEstimate> last_;
  std::vector<FilterEvent> events_;
  std::size_t steps_ = 0;
};

/// Runs a fresh filter over a stream.
std::vector<PostureEstimate> run_filter(std::span<const StylusObservation> observations,
                                        const HumanModel& model, const FilterConfig& cfg,
                                        const ValidityFn& validity);

/// Throws OrderingError naming the first index whose timestamp does not increase.
void check_time_ordering(std::span<const StylusObservation> observations, const char* module);

}  // namespace teleposture
