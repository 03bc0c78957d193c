#pragma once

// Bound-constrained nonlinear least squares with a rectangular trust region
// and a dogleg step (Gauss-Newton model). Every iterate stays inside the
// bounds and the cost never increases across accepted iterations.

#include <vector>

#include <Eigen/Core>

namespace teleposture {

/// Gauss-Newton model provider. linearize() must be called before
/// gradient(), hessian_times() and newton_step().
class LeastSquaresProblem {
 public:
  virtual ~LeastSquaresProblem() = default;

  virtual Eigen::Index size() const = 0;
  /// 0.5 * ||r(x)||^2
  virtual double cost(const Eigen::VectorXd& x) const = 0;
  virtual void linearize(const Eigen::VectorXd& x) = 0;
  /// J^T r at the linearization point.
  virtual const Eigen::VectorXd& gradient() const = 0;
  /// J^T J v
  virtual Eigen::VectorXd hessian_times(const Eigen::VectorXd& v) const = 0;
  /// Solution p of (J^T J + damping I) p = -g over the free variables; zero
  /// on variables flagged in `fixed`.
  virtual Eigen::VectorXd newton_step(const std::vector<char>& fixed, double damping) const = 0;
};

struct TrustRegionOptions {
  int max_iters = 100;
  double step_tol = 1e-10;
  double gradient_tol = 1e-12;
  double initial_radius = 0.5;
};

struct TrustRegionResult {
  Eigen::VectorXd x;
  double cost = 0.0;
  double initial_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Costs of the accepted iterates, starting with the initial cost.
  std::vector<double> cost_history;
};

TrustRegionResult solve_bounded_least_squares(LeastSquaresProblem& problem,
                                              const Eigen::VectorXd& x0,
                                              const Eigen::VectorXd& lower,
                                              const Eigen::VectorXd& upper,
                                              const TrustRegionOptions& opts);

/// Dogleg path from the Cauchy point to the Gauss-Newton point, truncated to
/// the box [lo, hi] (which contains 0).
Eigen::VectorXd box_dogleg(const Eigen::VectorXd& cauchy, const Eigen::VectorXd& gauss_newton,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

}  // namespace teleposture
