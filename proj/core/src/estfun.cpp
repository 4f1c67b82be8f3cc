#include "bdsurvey/estfun.hpp"

#include <cmath>
#include <limits>

namespace bdsurvey {

double psi_mean(double y, double theta) { return y - theta; }

double psi_quantile(double y, double theta, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("psi_quantile: p must lie in (0, 1)");
  if (y < theta) return 1.0 - p;
  if (y > theta) return -p;
  return 0.0;
}

double psi_gini_hat(double y, double theta, const WeightedEcdf& fhat, double moment_xF,
                    double moment_x) {
  const double tail = moment_x - fhat.lower_moment(y);
  return 2.0 * (tail - moment_xF) + (2.0 * fhat(y) - 1.0) * y - theta * y;
}

Vector psi_linreg(double y, const Eigen::RowVectorXd& x, const Vector& theta) {
  if (x.size() != theta.size()) throw DomainError("psi_linreg: x and theta differ in length");
  const double residual = y - x.dot(theta);
  return x.transpose() * residual;
}

std::vector<double> GiniPsiHat::normalized(std::span<const double> w) {
  double total = 0.0;
  for (double wi : w) total += wi;
  if (!(total > 0.0)) throw DomainError("GiniPsiHat: weights must have positive total");
  const double scale = static_cast<double>(w.size()) / total;
  std::vector<double> out(w.begin(), w.end());
  for (double& wi : out) wi *= scale;
  return out;
}

GiniPsiHat::GiniPsiHat(std::span<const double> y, std::span<const double> w)
    : ecdf_(y, normalized(w)) {}

std::string to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::Mean: return "mean";
    case StatisticKind::Quantile: return "quantile";
    case StatisticKind::Gini: return "gini";
    case StatisticKind::LinearRegression: return "linreg";
    case StatisticKind::MaximumLikelihood: return "mle";
  }
  return "unknown";
}

EstimatingFunction::EstimatingFunction(StatisticKind kind, int dim, PsiFn psi,
                                       JacobianFn jacobian,
                                       JacobianStrategy jacobian_strategy,
                                       SolveStrategy solve_strategy)
    : kind_(kind),
      dim_(dim),
      psi_(std::move(psi)),
      jacobian_(std::move(jacobian)),
      jacobian_strategy_(jacobian_strategy),
      solve_strategy_(solve_strategy),
      p_(std::numeric_limits<double>::quiet_NaN()) {
  if (dim_ < 1) throw DomainError("EstimatingFunction: dim_theta must be positive");
  if (!psi_) throw DomainError("EstimatingFunction: psi is required");
  if ((jacobian_strategy_ == JacobianStrategy::DensityBased) != (kind_ == StatisticKind::Quantile))
    throw DomainError("EstimatingFunction: density-based Jacobian is reserved for quantiles");
}

EstimatingFunction EstimatingFunction::mean() {
  EstimatingFunction ef(
      StatisticKind::Mean, 1,
      [](const Vector& y, const Vector& theta) {
        return Vector::Constant(1, psi_mean(y(0), theta(0)));
      },
      [](const Vector&, const Vector&) { return Matrix::Constant(1, 1, -1.0); },
      JacobianStrategy::AnalyticAverage, SolveStrategy::ClosedForm);
  ef.scalar_psi_ = psi_mean;
  ef.scalar_jacobian_ = [](double, double) { return -1.0; };
  return ef;
}

EstimatingFunction EstimatingFunction::quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0, 1)");
  EstimatingFunction ef(
      StatisticKind::Quantile, 1,
      [p](const Vector& y, const Vector& theta) {
        return Vector::Constant(1, psi_quantile(y(0), theta(0), p));
      },
      {}, JacobianStrategy::DensityBased, SolveStrategy::SortBased);
  ef.scalar_psi_ = [p](double y, double theta) { return psi_quantile(y, theta, p); };
  ef.p_ = p;
  return ef;
}

EstimatingFunction EstimatingFunction::gini(std::span<const double> y,
                                            std::span<const double> w) {
  auto hat = std::make_shared<const GiniPsiHat>(y, w);
  EstimatingFunction ef(
      StatisticKind::Gini, 1,
      [hat](const Vector& yy, const Vector& theta) {
        return Vector::Constant(1, (*hat)(yy(0), theta(0)));
      },
      [](const Vector& yy, const Vector&) { return Matrix::Constant(1, 1, -yy(0)); },
      JacobianStrategy::AnalyticAverage, SolveStrategy::ClosedForm);
  ef.scalar_psi_ = [hat](double yy, double theta) { return (*hat)(yy, theta); };
  ef.scalar_jacobian_ = [](double yy, double) { return -yy; };
  return ef;
}

EstimatingFunction EstimatingFunction::linreg(int k) {
  if (k < 1) throw DomainError("linreg: need at least one regressor");
  return EstimatingFunction(
      StatisticKind::LinearRegression, k,
      [k](const Vector& y, const Vector& theta) {
        if (y.size() != k + 1) throw DomainError("linreg: observation has wrong length");
        return psi_linreg(y(0), y.tail(k).transpose(), theta);
      },
      [k](const Vector& y, const Vector&) {
        const Vector x = y.tail(k);
        return Matrix(-(x * x.transpose()));
      },
      JacobianStrategy::AnalyticAverage, SolveStrategy::ClosedForm);
}

Vector EstimatingFunction::psi(const Vector& y, const Vector& theta) const {
  if (theta.size() != dim_) throw DomainError("psi: theta has wrong dimension");
  Vector out = psi_(y, theta);
  if (out.size() != dim_) throw DomainError("psi: output length differs from dim_theta");
  return out;
}

Matrix EstimatingFunction::jacobian(const Vector& y, const Vector& theta) const {
  if (!jacobian_)
    throw UnsupportedStrategyError("estimating function '" + to_string(kind_) +
                                   "' has no analytic Jacobian");
  return jacobian_(y, theta);
}

EstimatingFunction psi_mle(EstimatingFunction::PsiFn score, int dim,
                           EstimatingFunction::JacobianFn score_jacobian) {
  if (!score_jacobian) {
    score_jacobian = [score, dim](const Vector& y, const Vector& theta) {
      Matrix jac(dim, dim);
      for (int j = 0; j < dim; ++j) {
        const double h = 1e-6 * (1.0 + std::abs(theta(j)));
        Vector up = theta, down = theta;
        up(j) += h;
        down(j) -= h;
        jac.col(j) = (score(y, up) - score(y, down)) / (2.0 * h);
      }
      return jac;
    };
  }
  return EstimatingFunction(StatisticKind::MaximumLikelihood, dim, std::move(score),
                            std::move(score_jacobian), JacobianStrategy::AnalyticAverage,
                            SolveStrategy::Newton);
}

}  // namespace bdsurvey
