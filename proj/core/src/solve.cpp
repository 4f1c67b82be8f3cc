#include "bdsurvey/solve.hpp"

#include "bdsurvey/ecdf.hpp"
#include "bdsurvey/error.hpp"
#include "bdsurvey/variance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bdsurvey {

namespace {

void check_weights(std::span<const double> w) {
  for (double wi : w)
    if (!(wi >= 0.0) || !std::isfinite(wi))
      throw DomainError("weights must be finite and nonnegative");
}

}  // namespace

SolveResult weighted_quantile(std::span<const double> y, std::span<const double> w, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("weighted_quantile: p must lie in (0, 1)");
  if (y.size() != w.size()) throw DomainError("weighted_quantile: length mismatch");
  check_weights(w);
  const WeightedEcdf fhat(y, w);
  if (fhat.support().empty()) throw DomainError("weighted_quantile: empty effective sample");
  SolveResult r;
  r.theta = Vector::Constant(1, fhat.quantile(p));
  r.converged = true;
  return r;
}

SolveResult gini(std::span<const double> y, std::span<const double> w) {
  if (y.size() != w.size()) throw DomainError("gini: length mismatch");
  check_weights(w);
  std::vector<std::size_t> idx;
  idx.reserve(w.size());
  double total_w = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    idx.push_back(i);
    total_w += w[i];
  }
  if (idx.empty()) throw DomainError("gini: empty effective sample");
  std::vector<std::pair<double, double>> pts(idx.size());  // (y, normalized w)
  const double scale = static_cast<double>(w.size()) / total_w;
  for (std::size_t k = 0; k < idx.size(); ++k) pts[k] = {y[idx[k]], w[idx[k]] * scale};
  std::sort(pts.begin(), pts.end());

  double wsum = 0.0;
  for (const auto& pt : pts) wsum += pt.second;
  double before = 0.0;
  double pair_sum = 0.0;  // sum_i w_i Y_i (W_<i - W_>i)
  double wy = 0.0;
  for (const auto& [yi, wi] : pts) {
    const double after = wsum - before - wi;
    pair_sum += wi * yi * (before - after);
    wy += wi * yi;
    before += wi;
  }
  if (!(wy > 0.0))
    throw DomainError("gini: weighted total must be positive");
  SolveResult r;
  r.theta = Vector::Constant(1, 2.0 * pair_sum / (2.0 * static_cast<double>(w.size()) * wy));
  r.converged = true;
  return r;
}

SolveResult wls(std::span<const Observation> pop, std::span<const double> w) {
  if (pop.size() != w.size()) throw DomainError("wls: length mismatch");
  check_weights(w);
  Eigen::Index k = -1;
  Matrix gram;
  Vector rhs;
  double scale = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    const Vector& yi = pop[i].y;
    if (k < 0) {
      k = yi.size() - 1;
      if (k < 1) throw DomainError("wls: observations need a regressand and regressors");
      gram = Matrix::Zero(k, k);
      rhs = Vector::Zero(k);
    }
    if (yi.size() != k + 1) throw DomainError("wls: inconsistent observation length");
    const auto x = yi.tail(k);
    gram.noalias() += w[i] * x * x.transpose();
    rhs.noalias() += w[i] * yi(0) * x;
    scale += w[i] * std::abs(yi(0)) * x.norm();
  }
  if (k < 0) throw DomainError("wls: empty effective sample");
  const auto big_n = static_cast<double>(w.size());
  gram /= big_n;
  rhs /= big_n;
  scale /= big_n;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12)
    throw RankDeficiencyError("wls: weighted Gram matrix is singular or ill-conditioned");

  const Eigen::LLT<Matrix> llt(gram);
  Vector theta = llt.solve(rhs);
  theta += llt.solve(rhs - gram * theta);  // one refinement step

  SolveResult r;
  r.theta = theta;
  r.iterations = 1;
  r.residual_norm = (rhs - gram * theta).norm();
  r.converged = r.residual_norm <= 1e-10 * std::max(scale, 1e-300);
  return r;
}

SolveResult newton_solve(const EstimatingFunction& ef, std::span<const Observation> pop,
                         std::span<const double> w, const Vector& theta0,
                         const NewtonOptions& options) {
  if (theta0.size() != ef.dim()) throw DomainError("newton_solve: theta0 has wrong dimension");
  auto residual = [&](const Vector& theta, bool& finite) {
    const Vector v = eval_psi_s(ef, pop, w, theta).value;
    finite = v.allFinite();
    return v;
  };

  SolveResult best;
  best.theta = theta0;
  bool finite = true;
  Vector psi = residual(theta0, finite);
  if (!finite) throw DomainError("newton_solve: theta0 outside the domain of psi");
  best.residual_norm = psi.norm();

  Vector theta = theta0;
  for (int it = 0; it < options.max_iter; ++it) {
    if (best.residual_norm <= options.tol) {
      best.converged = true;
      return best;
    }
    const Matrix jac = jacobian_avg(ef, pop, w, theta);
    const Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible()) throw SolverError("newton_solve: singular Jacobian");
    const Vector step = -lu.solve(psi);

    double t = 1.0;
    bool improved = false;
    for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
      const Vector trial = theta + t * step;
      const Vector trial_psi = residual(trial, finite);
      if (finite && trial_psi.norm() < best.residual_norm) {
        theta = trial;
        psi = trial_psi;
        best.theta = theta;
        best.residual_norm = psi.norm();
        improved = true;
        break;
      }
    }
    best.iterations = it + 1;
    if (!improved) break;
  }
  best.converged = best.residual_norm <= options.tol;
  return best;
}

}  // namespace bdsurvey
