#include "teleposture/trust_region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace teleposture {

namespace {

bool inside(const Eigen::VectorXd& p, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return ((p - lo).array() >= 0.0).all() && ((hi - p).array() >= 0.0).all();
}

// Largest t in [0, 1] with base + t * dir inside [lo, hi]; base must be inside.
double max_fraction(const Eigen::VectorXd& base, const Eigen::VectorXd& dir,
                    const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  double t = 1.0;
  for (Eigen::Index i = 0; i < dir.size(); ++i) {
    if (dir[i] > 0.0) t = std::min(t, (hi[i] - base[i]) / dir[i]);
    else if (dir[i] < 0.0) t = std::min(t, (lo[i] - base[i]) / dir[i]);
  }
  return std::max(t, 0.0);
}

}  // namespace

Eigen::VectorXd box_dogleg(const Eigen::VectorXd& cauchy, const Eigen::VectorXd& gauss_newton,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (inside(gauss_newton, lo, hi)) return gauss_newton;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(cauchy.size());
  if (!inside(cauchy, lo, hi)) return max_fraction(zero, cauchy, lo, hi) * cauchy;
  const Eigen::VectorXd leg = gauss_newton - cauchy;
  return cauchy + max_fraction(cauchy, leg, lo, hi) * leg;
}

TrustRegionResult solve_bounded_least_squares(LeastSquaresProblem& problem,
                                              const Eigen::VectorXd& x0,
                                              const Eigen::VectorXd& lower,
                                              const Eigen::VectorXd& upper,
                                              const TrustRegionOptions& opts) {
  const Eigen::Index n = problem.size();
  TrustRegionResult res;
  res.x = x0.cwiseMax(lower).cwiseMin(upper);
  double f = problem.cost(res.x);
  res.initial_cost = f;
  res.cost_history.push_back(f);
  problem.linearize(res.x);
  double radius = opts.initial_radius;
  std::vector<char> fixed(static_cast<std::size_t>(n), 0);

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    res.iterations = iter + 1;
    const Eigen::VectorXd& g = problem.gradient();
    Eigen::VectorXd g_free = g;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lo = res.x[i] <= lower[i] && g[i] > 0.0;
      const bool at_hi = res.x[i] >= upper[i] && g[i] < 0.0;
      fixed[i] = (at_lo || at_hi) ? 1 : 0;
      if (fixed[i]) g_free[i] = 0.0;
    }
    if (g_free.lpNorm<Eigen::Infinity>() <= opts.gradient_tol) {
      res.converged = true;
      break;
    }

    const Eigen::VectorXd p_gn = problem.newton_step(fixed, 0.0);
    const Eigen::VectorXd hg = problem.hessian_times(g_free);
    const double curvature = g_free.dot(hg);
    const double alpha = curvature > 0.0 ? g_free.squaredNorm() / curvature : radius;
    const Eigen::VectorXd p_c = -alpha * g_free;

    Eigen::VectorXd lo(n), hi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (fixed[i]) {
        lo[i] = hi[i] = 0.0;
      } else {
        lo[i] = std::max(lower[i] - res.x[i], -radius);
        hi[i] = std::min(upper[i] - res.x[i], radius);
      }
    }

    auto predicted = [&](const Eigen::VectorXd& p) {
      return -(g.dot(p) + 0.5 * p.dot(problem.hessian_times(p)));
    };
    Eigen::VectorXd step = box_dogleg(p_c, p_gn.allFinite() ? p_gn : p_c, lo, hi);
    double pred = predicted(step);
    if (p_gn.allFinite()) {
      // Projected Gauss-Newton step: makes progress when a bound cuts the
      // dogleg path short.
      const Eigen::VectorXd projected = p_gn.cwiseMax(lo).cwiseMin(hi);
      const double pred_proj = predicted(projected);
      if (pred_proj > pred) {
        step = projected;
        pred = pred_proj;
      }
    }

    const double step_norm = step.lpNorm<Eigen::Infinity>();
    if (!(pred > 0.0) || step_norm == 0.0) {
      // No model decrease is possible: stationary within the bounds.
      res.converged = true;
      break;
    }

    const Eigen::VectorXd candidate = (res.x + step).cwiseMax(lower).cwiseMin(upper);
    const double f_new = problem.cost(candidate);
    const double rho = (f - f_new) / pred;
    const bool accepted = std::isfinite(f_new) && f_new < f && rho > 1e-4;

    if (rho < 0.25 || !std::isfinite(f_new)) {
      radius = 0.25 * step_norm;
    } else if (rho > 0.75 && step_norm >= 0.99 * radius) {
      radius = 2.0 * radius;
    }

    if (accepted) {
      res.x = candidate;
      f = f_new;
      res.cost_history.push_back(f);
      problem.linearize(res.x);
      if (step_norm < opts.step_tol) {
        res.converged = true;
        break;
      }
    } else if (radius < opts.step_tol) {
      res.converged = true;
      break;
    }
  }
  res.cost = f;
  return res;
}

}  // namespace teleposture
