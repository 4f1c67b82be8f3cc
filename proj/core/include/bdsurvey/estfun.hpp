#pragma once

#include "bdsurvey/ecdf.hpp"
#include "bdsurvey/error.hpp"
#include "bdsurvey/types.hpp"

#include <concepts>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>

namespace bdsurvey {

// ---- scalar and vector estimating functions --------------------------------

/// y - theta.
double psi_mean(double y, double theta);

/// (1-p) I(y < theta) - p I(y > theta); zero on the tie y == theta.
double psi_quantile(double y, double theta, double p);

/// Gini estimating function with F replaced by the weighted ECDF:
///   2 [ (1/N) sum_j w_j I(y <= Y_j) Y_j - moment_xF ] + (2 F(y) - 1) y - theta y.
/// moment_xF and moment_x must come from the same sample as fhat.
double psi_gini_hat(double y, double theta, const WeightedEcdf& fhat, double moment_xF,
                    double moment_x);

/// x^T (y - x theta).
Vector psi_linreg(double y, const Eigen::RowVectorXd& x, const Vector& theta);

/// Gini psi-hat bound to one weighted sample. Weights are normalized to mean
/// one before the ECDF is built; moments are computed once.
class GiniPsiHat {
 public:
  GiniPsiHat(std::span<const double> y, std::span<const double> w);
  double operator()(double y, double theta) const {
    return psi_gini_hat(y, theta, ecdf_, ecdf_.moment_xF(), ecdf_.moment_x());
  }
  const WeightedEcdf& ecdf() const { return ecdf_; }

 private:
  static std::vector<double> normalized(std::span<const double> w);
  WeightedEcdf ecdf_;
};

// ---- EstimatingFunction ----------------------------------------------------

enum class StatisticKind { Mean, Quantile, Gini, LinearRegression, MaximumLikelihood };
enum class JacobianStrategy { AnalyticAverage, DensityBased, Custom };
enum class SolveStrategy { ClosedForm, SortBased, Newton };

std::string to_string(StatisticKind kind);

class EstimatingFunction {
 public:
  using PsiFn = std::function<Vector(const Vector& y, const Vector& theta)>;
  using JacobianFn = std::function<Matrix(const Vector& y, const Vector& theta)>;
  using ScalarPsiFn = std::function<double(double y, double theta)>;

  EstimatingFunction(StatisticKind kind, int dim, PsiFn psi, JacobianFn jacobian,
                     JacobianStrategy jacobian_strategy, SolveStrategy solve_strategy);

  static EstimatingFunction mean();
  static EstimatingFunction quantile(double p);
  /// Gini psi-hat on the weighted sample (y, w). Units with w == 0 are not read.
  static EstimatingFunction gini(std::span<const double> y, std::span<const double> w);
  /// Regression of y(0) on y(1..k); dim = k.
  static EstimatingFunction linreg(int k);

  StatisticKind kind() const { return kind_; }
  int dim() const { return dim_; }
  JacobianStrategy jacobian_strategy() const { return jacobian_strategy_; }
  SolveStrategy solve_strategy() const { return solve_strategy_; }
  /// Quantile level; NaN for non-quantile statistics.
  double quantile_level() const { return p_; }

  Vector psi(const Vector& y, const Vector& theta) const;
  bool has_jacobian() const { return static_cast<bool>(jacobian_); }
  /// Per-unit Jacobian of psi with respect to theta.
  Matrix jacobian(const Vector& y, const Vector& theta) const;

  /// Allocation-free path for scalar statistics (mean, quantile, gini).
  bool has_scalar_psi() const { return static_cast<bool>(scalar_psi_); }
  double psi_scalar(double y, double theta) const { return scalar_psi_(y, theta); }
  bool has_scalar_jacobian() const { return static_cast<bool>(scalar_jacobian_); }
  double jacobian_scalar(double y, double theta) const { return scalar_jacobian_(y, theta); }

 private:
  StatisticKind kind_;
  int dim_;
  PsiFn psi_;
  JacobianFn jacobian_;
  ScalarPsiFn scalar_psi_;
  ScalarPsiFn scalar_jacobian_;
  JacobianStrategy jacobian_strategy_;
  SolveStrategy solve_strategy_;
  double p_;
};

/// Wraps a log-likelihood score (gradient in theta) as an estimating function
/// solved by Newton iteration. Without an analytic score Jacobian, per-unit
/// Jacobians are taken by central differences of the score.
EstimatingFunction psi_mle(EstimatingFunction::PsiFn score, int dim,
                           EstimatingFunction::JacobianFn score_jacobian = {});

// ---- estimating equations --------------------------------------------------

struct EstimatingEquationValue {
  Vector value;
  std::size_t n_terms = 0;
};

/// Anything indexable that yields population units.
template <class Source>
concept ObservationSource = requires(const Source& s, std::size_t i) {
  { s.size() } -> std::convertible_to<std::size_t>;
  { s[i] } -> std::convertible_to<const Observation&>;
};

/// Psi_s(theta) = (1/N) sum_i w_i psi(Y_i; theta), N = pop.size().
/// Zero-weighted units are skipped without being read.
template <ObservationSource Source>
EstimatingEquationValue eval_psi_s(const EstimatingFunction& ef, const Source& pop,
                                   std::span<const double> w, const Vector& theta) {
  if (w.size() != pop.size()) throw DomainError("eval_psi_s: weight length mismatch");
  EstimatingEquationValue out;
  out.value = Vector::Zero(ef.dim());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    const Observation& obs = pop[i];
    out.value += w[i] * ef.psi(obs.y, theta);
    ++out.n_terms;
  }
  out.value /= static_cast<double>(pop.size());
  return out;
}

inline EstimatingEquationValue eval_psi_s(const EstimatingFunction& ef,
                                          std::span<const Observation> pop,
                                          std::span<const double> w, const Vector& theta) {
  return eval_psi_s<std::span<const Observation>>(ef, pop, w, theta);
}

}  // namespace bdsurvey
