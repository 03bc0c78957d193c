#include "teleposture/ik.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <Eigen/Dense>

#include "teleposture/errors.hpp"
#include "teleposture/filter.hpp"
#include "teleposture/rotation.hpp"
#include "teleposture/trust_region.hpp"

namespace teleposture {

namespace {

constexpr const char* kModule = "ik";
constexpr int kDim = 20;
constexpr std::size_t kMaxDenseSteps = 200;

using StepVector = ik_detail::StepVector;
using Block = Eigen::Matrix<double, kDim, kDim>;

StepVector pack(const PostureState& s) {
  StepVector x;
  x << s.q, s.qdot;
  return x;
}

PostureState unpack(const StepVector& x) { return {x.head<kNumJoints>(), x.tail<kNumJoints>()}; }

double nominal_dt(std::span<const StylusObservation> traj) {
  return traj.size() >= 2 ? traj[1].t - traj[0].t : 0.02;
}

StepVector motion_weights(const IkConfig& cfg, double dt) {
  StepVector w;
  w.head<kNumJoints>() = (cfg.accel_rate * dt * dt * dt).cwiseSqrt().cwiseInverse();
  w.tail<kNumJoints>() = (cfg.accel_rate * dt).cwiseSqrt().cwiseInverse();
  return w;
}

StepVector anchor_weights(const HumanModel& model, const IkConfig& cfg, double dt) {
  StepVector w;
  w.head<kNumJoints>() = (cfg.prior_scale * model.range_of_motion()).cwiseInverse();
  w.tail<kNumJoints>() = (cfg.accel_rate * dt).cwiseSqrt().cwiseInverse();
  return w;
}

StepVector anchor_state(const HumanModel& model) {
  StepVector a = StepVector::Zero();
  a.head<kNumJoints>() = model.neutral_posture();
  return a;
}

// d(x_t - f(x_{t-1})) / d x_{t-1}
Block motion_prev_jacobian(double dt) {
  Block m = Block::Zero();
  m.topLeftCorner<kNumJoints, kNumJoints>() = -Eigen::Matrix<double, kNumJoints, kNumJoints>::Identity();
  m.topRightCorner<kNumJoints, kNumJoints>() =
      -dt * Eigen::Matrix<double, kNumJoints, kNumJoints>::Identity();
  m.bottomRightCorner<kNumJoints, kNumJoints>() =
      -Eigen::Matrix<double, kNumJoints, kNumJoints>::Identity();
  return m;
}

// Consecutive steps of a trajectory solved jointly. The first step is tied
// either to a fixed predecessor (motion residual) or to the neutral anchor.
class WindowProblem final : public LeastSquaresProblem {
 public:
  WindowProblem(const HumanModel& model, const IkConfig& cfg,
                std::span<const StylusObservation> obs, std::optional<StepVector> prev,
                double first_dt, double anchor_dt, bool dense)
      : model_(model), cfg_(cfg), obs_(obs), prev_(std::move(prev)), first_dt_(first_dt),
        dense_(dense), steps_(static_cast<Eigen::Index>(obs.size())) {
    first_weights_ = prev_ ? motion_weights(cfg, first_dt) : anchor_weights(model, cfg, anchor_dt);
    anchor_ = anchor_state(model);
    if (cfg.comfort_scale > 0.0) {
      comfort_weights_ = (cfg.comfort_scale * model.range_of_motion()).cwiseInverse();
    }
    dts_.resize(obs.size(), 0.0);
    for (std::size_t t = 1; t < obs.size(); ++t) dts_[t] = obs[t].t - obs[t - 1].t;
    diag_.resize(obs.size());
    sub_.resize(obs.size());
  }

  Eigen::Index size() const override { return steps_ * kDim; }

  double cost(const Eigen::VectorXd& x) const override {
    double sum = 0.0;
    for (Eigen::Index t = 0; t < steps_; ++t) {
      const StepVector xt = x.segment<kDim>(t * kDim);
      sum += ik_detail::observation_residual(model_, cfg_, obs_[t], xt).squaredNorm();
      sum += prior_residual(x, t).squaredNorm();
      if (comfort_weights_) sum += comfort_residual(xt).squaredNorm();
    }
    return 0.5 * sum;
  }

  void linearize(const Eigen::VectorXd& x) override {
    grad_ = Eigen::VectorXd::Zero(size());
    for (Eigen::Index t = 0; t < steps_; ++t) {
      const StepVector xt = x.segment<kDim>(t * kDim);
      const auto r_obs = ik_detail::observation_residual(model_, cfg_, obs_[t], xt);
      const auto j_obs = ik_detail::observation_jacobian(model_, cfg_, obs_[t], xt);
      diag_[t] = j_obs.transpose() * j_obs;
      grad_.segment<kDim>(t * kDim) += j_obs.transpose() * r_obs;
      sub_[t].setZero();

      if (comfort_weights_) {
        diag_[t].diagonal().head<kNumJoints>() += comfort_weights_->cwiseAbs2();
        grad_.segment<kNumJoints>(t * kDim) += comfort_weights_->cwiseProduct(comfort_residual(xt));
      }

      const StepVector r_prior = prior_residual(x, t);
      const StepVector w = t == 0 ? first_weights_ : motion_weights(cfg_, dts_[t]);
      diag_[t].diagonal() += w.cwiseAbs2();
      grad_.segment<kDim>(t * kDim) += w.cwiseProduct(r_prior);
      if (t > 0) {
        const Block jp = w.asDiagonal() * motion_prev_jacobian(dts_[t]);
        diag_[t - 1] += jp.transpose() * jp;
        sub_[t] = w.asDiagonal() * jp;  // (d r / d x_t)^T (d r / d x_{t-1})
        grad_.segment<kDim>((t - 1) * kDim) += jp.transpose() * r_prior;
      }
    }
  }

  const Eigen::VectorXd& gradient() const override { return grad_; }

  Eigen::VectorXd hessian_times(const Eigen::VectorXd& v) const override {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
    for (Eigen::Index t = 0; t < steps_; ++t) {
      out.segment<kDim>(t * kDim) += diag_[t] * v.segment<kDim>(t * kDim);
      if (t > 0) {
        out.segment<kDim>(t * kDim) += sub_[t] * v.segment<kDim>((t - 1) * kDim);
        out.segment<kDim>((t - 1) * kDim) += sub_[t].transpose() * v.segment<kDim>(t * kDim);
      }
    }
    return out;
  }

  Eigen::VectorXd newton_step(const std::vector<char>& fixed, double damping) const override {
    return dense_ ? dense_solve(fixed, damping) : banded_solve(fixed, damping);
  }

  Eigen::MatrixXd dense_hessian() const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(size(), size());
    for (Eigen::Index t = 0; t < steps_; ++t) {
      h.block<kDim, kDim>(t * kDim, t * kDim) = diag_[t];
      if (t > 0) {
        h.block<kDim, kDim>(t * kDim, (t - 1) * kDim) = sub_[t];
        h.block<kDim, kDim>((t - 1) * kDim, t * kDim) = sub_[t].transpose();
      }
    }
    return h;
  }

 private:
  JointVector comfort_residual(const StepVector& xt) const {
    return comfort_weights_->cwiseProduct(xt.head<kNumJoints>() - model_.neutral_posture());
  }

  StepVector prior_residual(const Eigen::VectorXd& x, Eigen::Index t) const {
    const StepVector xt = x.segment<kDim>(t * kDim);
    if (t == 0) {
      if (prev_) return ik_detail::motion_residual(cfg_, *prev_, xt, first_dt_);
      return first_weights_.cwiseProduct(xt - anchor_);
    }
    return ik_detail::motion_residual(cfg_, x.segment<kDim>((t - 1) * kDim), xt, dts_[t]);
  }

  Eigen::VectorXd dense_solve(const std::vector<char>& fixed, double damping) const {
    Eigen::MatrixXd h = dense_hessian();
    Eigen::VectorXd rhs = -grad_;
    for (Eigen::Index i = 0; i < size(); ++i) {
      h(i, i) += damping;
      if (fixed[i]) {
        h.row(i).setZero();
        h.col(i).setZero();
        h(i, i) = 1.0;
        rhs[i] = 0.0;
      }
    }
    return h.ldlt().solve(rhs);
  }

  // Block-tridiagonal elimination: S_t = A_t - C_t S_{t-1}^-1 C_t^T.
  Eigen::VectorXd banded_solve(const std::vector<char>& fixed, double damping) const {
    std::vector<Eigen::LDLT<Block>> factors(static_cast<std::size_t>(steps_));
    std::vector<Block> lower(static_cast<std::size_t>(steps_));
    std::vector<StepVector> y(static_cast<std::size_t>(steps_));
    for (Eigen::Index t = 0; t < steps_; ++t) {
      Block a = diag_[t];
      Block c = sub_[t];
      StepVector b = -grad_.segment<kDim>(t * kDim);
      for (int i = 0; i < kDim; ++i) {
        a(i, i) += damping;
        if (fixed[t * kDim + i]) {
          a.row(i).setZero();
          a.col(i).setZero();
          a(i, i) = 1.0;
          c.row(i).setZero();
          b[i] = 0.0;
        }
        if (t > 0 && fixed[(t - 1) * kDim + i]) c.col(i).setZero();
      }
      if (t > 0) {
        const Block sinv_ct = factors[t - 1].solve(c.transpose());
        a -= c * sinv_ct;
        b -= c * factors[t - 1].solve(y[t - 1]);
      }
      lower[t] = c;
      factors[t].compute(a);
      y[t] = b;
    }
    Eigen::VectorXd out(size());
    StepVector next = factors[steps_ - 1].solve(y[steps_ - 1]);
    out.segment<kDim>((steps_ - 1) * kDim) = next;
    for (Eigen::Index t = steps_ - 2; t >= 0; --t) {
      next = factors[t].solve(y[t] - lower[t + 1].transpose() * next);
      out.segment<kDim>(t * kDim) = next;
    }
    return out;
  }

  const HumanModel& model_;
  const IkConfig& cfg_;
  std::span<const StylusObservation> obs_;
  std::optional<StepVector> prev_;
  double first_dt_;
  bool dense_;
  Eigen::Index steps_;
  StepVector first_weights_;
  StepVector anchor_;
  std::optional<JointVector> comfort_weights_;
  std::vector<double> dts_;
  std::vector<Block> diag_;
  std::vector<Block> sub_;
  Eigen::VectorXd grad_;
};

void bounds_for(const HumanModel& model, Eigen::Index steps, Eigen::VectorXd& lo,
                Eigen::VectorXd& hi) {
  const double inf = std::numeric_limits<double>::infinity();
  lo.resize(steps * kDim);
  hi.resize(steps * kDim);
  for (Eigen::Index t = 0; t < steps; ++t) {
    lo.segment<kNumJoints>(t * kDim) = model.limits_lo();
    hi.segment<kNumJoints>(t * kDim) = model.limits_hi();
    lo.segment<kNumJoints>(t * kDim + kNumJoints).setConstant(-inf);
    hi.segment<kNumJoints>(t * kDim + kNumJoints).setConstant(inf);
  }
}

TrustRegionOptions tr_options(const IkConfig& cfg) {
  TrustRegionOptions opts;
  opts.max_iters = cfg.max_iters;
  opts.step_tol = cfg.tol;
  opts.initial_radius = cfg.initial_radius;
  return opts;
}

void validate_trajectory(std::span<const StylusObservation> traj) {
  check_time_ordering(traj, kModule);
}

}  // namespace

namespace ik_detail {

Eigen::Matrix<double, 12, 1> observation_residual(const HumanModel& model, const IkConfig& cfg,
                                                  const StylusObservation& obs,
                                                  const StepVector& x) {
  const ChainFrames frames = chain_frames(model, x.head<kNumJoints>());
  const Eigen::Matrix<double, 6, 1> twist = jacobian(frames) * x.tail<kNumJoints>();
  Eigen::Matrix<double, 12, 1> r;
  r.segment<3>(0) = frames.tool_position - obs.pose.position;
  r.segment<3>(3) = rotation_difference(frames.tool_orientation, obs.pose.orientation);
  r.segment<3>(6) = twist.head<3>() - obs.velocity.linear;
  r.segment<3>(9) = twist.tail<3>() - obs.velocity.angular;
  return r.cwiseQuotient(cfg.sigma1.cwiseSqrt());
}

Eigen::Matrix<double, 12, 20> observation_jacobian(const HumanModel& model, const IkConfig& cfg,
                                                   const StylusObservation& obs,
                                                   const StepVector& x) {
  const ChainFrames frames = chain_frames(model, x.head<kNumJoints>());
  const Jacobian jac = jacobian(frames);
  const Eigen::Vector3d phi = rotation_difference(frames.tool_orientation, obs.pose.orientation);
  Eigen::Matrix<double, 12, 20> out = Eigen::Matrix<double, 12, 20>::Zero();
  out.block<3, kNumJoints>(0, 0) = jac.topRows<3>();
  out.block<3, kNumJoints>(3, 0) = left_jacobian_inverse(phi) * jac.bottomRows<3>();
  out.block<6, kNumJoints>(6, 0) = twist_sensitivity(frames, x.tail<kNumJoints>());
  out.block<6, kNumJoints>(6, kNumJoints) = jac;
  return cfg.sigma1.cwiseSqrt().cwiseInverse().asDiagonal() * out;
}

StepVector motion_residual(const IkConfig& cfg, const StepVector& prev, const StepVector& x,
                           double dt) {
  StepVector predicted;
  predicted.head<kNumJoints>() = prev.head<kNumJoints>() + dt * prev.tail<kNumJoints>();
  predicted.tail<kNumJoints>() = prev.tail<kNumJoints>();
  return motion_weights(cfg, dt).cwiseProduct(x - predicted);
}

}  // namespace ik_detail

void IkConfig::validate() const {
  if (!sigma1.allFinite() || (sigma1.array() <= 0.0).any()) {
    throw ConfigError(kModule, "sigma1 must have a finite positive diagonal");
  }
  if (!accel_rate.allFinite() || (accel_rate.array() <= 0.0).any()) {
    throw ConfigError(kModule, "accel_rate entries must be finite and positive");
  }
  if (!(prior_scale > 0.0)) throw ConfigError(kModule, "prior_scale must be positive");
  if (max_iters <= 0) throw ConfigError(kModule, "max_iters must be positive");
  if (!(tol > 0.0)) throw ConfigError(kModule, "tol must be positive");
  if (restarts < 1) throw ConfigError(kModule, "restarts must be at least 1");
  if (!(restart_scale >= 0.0)) throw ConfigError(kModule, "restart_scale must be >= 0");
  if (!(initial_radius > 0.0)) throw ConfigError(kModule, "initial_radius must be positive");
  if (!(comfort_scale >= 0.0)) throw ConfigError(kModule, "comfort_scale must be >= 0");
}

IkConfig IkConfig::tracking() {
  IkConfig cfg;
  cfg.sigma1 *= 1e-6;
  cfg.restarts = 1;
  cfg.max_iters = 200;
  return cfg;
}

double trajectory_objective(std::span<const StylusObservation> traj, const HumanModel& model,
                            const IkConfig& cfg, const std::vector<PostureState>& states) {
  if (states.size() != traj.size()) {
    throw InputError(kModule, "state trajectory length does not match observations");
  }
  if (traj.empty()) return 0.0;
  WindowProblem problem(model, cfg, traj, std::nullopt, 0.0, nominal_dt(traj), false);
  Eigen::VectorXd x(problem.size());
  for (std::size_t t = 0; t < states.size(); ++t) x.segment<kDim>(t * kDim) = pack(states[t]);
  return 2.0 * problem.cost(x);
}

IkResult online_ik(std::span<const StylusObservation> traj, const HumanModel& model,
                   const IkConfig& cfg) {
  cfg.validate();
  validate_trajectory(traj);
  IkResult result;
  if (traj.empty()) return result;
  const double anchor_dt = nominal_dt(traj);
  const TrustRegionOptions opts = tr_options(cfg);
  Rng rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd lo, hi;
  bounds_for(model, 1, lo, hi);

  std::optional<StepVector> prev;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const double dt = t > 0 ? traj[t].t - traj[t - 1].t : 0.0;
    WindowProblem problem(model, cfg, traj.subspan(t, 1), prev, dt, anchor_dt, true);
    StepVector warm = prev ? pack(predict_mean(unpack(*prev), dt)) : anchor_state(model);

    std::optional<TrustRegionResult> best;
    for (int start = 0; start < cfg.restarts; ++start) {
      Eigen::VectorXd x0 = warm;
      if (start > 0) {
        for (int i = 0; i < kNumJoints; ++i) x0[i] += cfg.restart_scale * normal(rng);
      }
      TrustRegionResult r = solve_bounded_least_squares(problem, x0, lo, hi, opts);
      if (!best || r.cost < best->cost) best = std::move(r);
    }
    const StepVector sol = best->x;
    result.states.push_back(unpack(sol));
    result.diagnostics.push_back({t, best->iterations, 2.0 * best->cost, best->converged});
    result.iterations += best->iterations;
    if (!best->converged) result.flagged.push_back(t);
    prev = sol;
  }
  result.objective = trajectory_objective(traj, model, cfg, result.states);
  return result;
}

IkResult offline_traj_ik(std::span<const StylusObservation> traj, const HumanModel& model,
                         const IkConfig& cfg, const std::vector<PostureState>& init) {
  cfg.validate();
  validate_trajectory(traj);
  if (init.size() != traj.size()) {
    throw InputError(kModule, "initial trajectory length does not match observations");
  }
  IkResult result;
  if (traj.empty()) return result;
  if (cfg.dense && traj.size() > kMaxDenseSteps) {
    throw ConfigError(kModule, "dense offline solve is limited to 200 steps");
  }
  WindowProblem problem(model, cfg, traj, std::nullopt, 0.0, nominal_dt(traj), cfg.dense);
  Eigen::VectorXd x0(problem.size());
  for (std::size_t t = 0; t < init.size(); ++t) x0.segment<kDim>(t * kDim) = pack(init[t]);
  Eigen::VectorXd lo, hi;
  bounds_for(model, static_cast<Eigen::Index>(traj.size()), lo, hi);
  const TrustRegionResult r = solve_bounded_least_squares(problem, x0, lo, hi, tr_options(cfg));
  result.states.reserve(traj.size());
  for (std::size_t t = 0; t < traj.size(); ++t) {
    result.states.push_back(unpack(r.x.segment<kDim>(t * kDim)));
  }
  result.iterations = r.iterations;
  result.diagnostics.push_back({0, r.iterations, 2.0 * r.cost, r.converged});
  if (!r.converged) result.flagged.push_back(0);
  result.objective = 2.0 * r.cost;
  return result;
}

}  // namespace teleposture
