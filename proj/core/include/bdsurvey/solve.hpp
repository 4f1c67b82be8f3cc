#pragma once

#include "bdsurvey/estfun.hpp"
#include "bdsurvey/types.hpp"

#include <span>

namespace bdsurvey {

struct SolveResult {
  Vector theta;
  int iterations = 0;
  bool converged = false;
  double residual_norm = 0.0;

  double scalar() const { return theta(0); }
};

/// inf{y : F_s(y) >= p} with F_s built from internally normalized weights.
SolveResult weighted_quantile(std::span<const double> y, std::span<const double> w, double p);

/// Weighted Gini index sum_ij w_i w_j |Y_i - Y_j| / (2 N sum_i w_i Y_i) on
/// normalized weights, evaluated in O(N log N) from sorted cumulative weights.
SolveResult gini(std::span<const double> y, std::span<const double> w);

/// Weighted least squares of y(0) on y(1..k) via the normal equations.
/// Throws RankDeficiencyError when the weighted Gram matrix is singular or its
/// condition number exceeds 1e12.
SolveResult wls(std::span<const Observation> pop, std::span<const double> w);

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 100;
  int max_halvings = 30;
};

/// Damped Newton iteration on Psi_s(theta) = 0 using the averaged analytic
/// Jacobian. Step length is halved while ||Psi_s|| fails to decrease.
SolveResult newton_solve(const EstimatingFunction& ef, std::span<const Observation> pop,
                         std::span<const double> w, const Vector& theta0,
                         const NewtonOptions& options = {});

}  // namespace bdsurvey
