#include "bdsurvey/variance.hpp"

#include "bdsurvey/ecdf.hpp"
#include "bdsurvey/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bdsurvey {

namespace {

void require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw DomainError(std::string(what) + ": matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw DomainError(std::string(what) + ": matrix is not symmetric");
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

DensityEstimate::DensityEstimate(std::span<const double> y, std::span<const double> w) {
  if (y.size() != w.size()) throw DomainError("density: length mismatch");
  double sum_w2 = 0.0;
  double sum_wy = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    if (!(w[i] > 0.0)) throw DomainError("density: weights must be nonnegative");
    y_.push_back(y[i]);
    w_.push_back(w[i]);
    total_w_ += w[i];
    sum_w2 += w[i] * w[i];
    sum_wy += w[i] * y[i];
  }
  if (y_.size() < 2) throw DomainError("density: need at least two observed values");
  const double mean = sum_wy / total_w_;
  double ss = 0.0;
  for (std::size_t i = 0; i < y_.size(); ++i) ss += w_[i] * (y_[i] - mean) * (y_[i] - mean);
  const double sd = std::sqrt(ss / total_w_);
  if (!(sd > 0.0)) throw DomainError("density: degenerate sample with zero spread");

  const WeightedEcdf fhat(y_, w_);
  const double iqr = fhat.quantile(0.75) - fhat.quantile(0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  const double m = total_w_ * total_w_ / sum_w2;
  bandwidth_ = 0.9 * spread * std::pow(m, -0.2);
}

double DensityEstimate::operator()(double y) const {
  const double inv_h = 1.0 / bandwidth_;
  double acc = 0.0;
  for (std::size_t i = 0; i < y_.size(); ++i) {
    const double z = (y - y_[i]) * inv_h;
    acc += w_[i] * std::exp(-0.5 * z * z);
  }
  return acc * inv_h / (total_w_ * std::sqrt(2.0 * std::numbers::pi));
}

Matrix jacobian_avg(const EstimatingFunction& ef, std::span<const Observation> pop,
                    std::span<const double> w, const Vector& theta) {
  if (ef.jacobian_strategy() == JacobianStrategy::DensityBased)
    throw UnsupportedStrategyError(
        "jacobian_avg: psi_dot is undefined for quantiles; use density_jacobian");
  if (pop.size() != w.size()) throw DomainError("jacobian_avg: length mismatch");
  Matrix acc = Matrix::Zero(ef.dim(), ef.dim());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    acc += w[i] * ef.jacobian(pop[i].y, theta);
  }
  return acc / static_cast<double>(w.size());
}

double jacobian_avg(const EstimatingFunction& ef, std::span<const double> y,
                    std::span<const double> w, double theta) {
  if (ef.jacobian_strategy() == JacobianStrategy::DensityBased)
    throw UnsupportedStrategyError(
        "jacobian_avg: psi_dot is undefined for quantiles; use density_jacobian");
  if (!ef.has_scalar_jacobian()) throw DomainError("jacobian_avg: statistic is not scalar");
  if (y.size() != w.size()) throw DomainError("jacobian_avg: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] != 0.0) acc += w[i] * ef.jacobian_scalar(y[i], theta);
  return acc / static_cast<double>(w.size());
}

Matrix density_jacobian(std::span<const double> y, std::span<const double> w, double theta) {
  const DensityEstimate fhat(y, w);
  return Matrix::Constant(1, 1, fhat(theta));
}

Matrix vprime_ht(const EstimatingFunction& ef, std::span<const Observation> pop,
                 const MembershipRealization& m, const Vector& theta,
                 std::span<const std::uint8_t> big_set) {
  if (m.size() != pop.size()) throw DomainError("vprime_ht: membership length mismatch");
  if (!big_set.empty() && big_set.size() != pop.size())
    throw DomainError("vprime_ht: big-data indicator length mismatch");
  std::vector<std::size_t> units;
  for (std::size_t i = 0; i < pop.size(); ++i)
    if (m.alpha()[i] && (big_set.empty() || !big_set[i])) units.push_back(i);

  const int d = ef.dim();
  Matrix psi(static_cast<Eigen::Index>(units.size()), d);
  for (std::size_t a = 0; a < units.size(); ++a)
    psi.row(static_cast<Eigen::Index>(a)) = ef.psi(pop[units[a]].y, theta).transpose();

  if (units.size() > 1 && !m.has_second_order())
    throw DesignInformationError("vprime_ht: second-order inclusion probabilities required");
  Matrix acc = Matrix::Zero(d, d);
  for (std::size_t a = 0; a < units.size(); ++a) {
    const std::size_t i = units[a];
    for (std::size_t b = 0; b < units.size(); ++b) {
      const std::size_t j = units[b];
      const double pij = m.pi2(i, j);
      if (!(pij > 0.0))
        throw DesignInformationError("vprime_ht: pi_ij must be positive for sampled pairs");
      const double coef = 1.0 / (m.pi()[i] * m.pi()[j]) - 1.0 / pij;
      acc.noalias() += coef * psi.row(static_cast<Eigen::Index>(a)).transpose() *
                       psi.row(static_cast<Eigen::Index>(b));
    }
  }
  return symmetrized(acc / static_cast<double>(pop.size()));
}

Matrix vprime_srswor(const Matrix& sampled_psi, std::size_t n, double f) {
  if (!(f > 0.0 && f <= 1.0)) throw DomainError("vprime_srswor: f must lie in (0, 1]");
  const Eigen::Index d = sampled_psi.cols();
  if (f == 1.0) return Matrix::Zero(d, d);
  if (n < 2) throw DomainError("vprime_srswor: sample size must be at least 2");
  if (static_cast<std::size_t>(sampled_psi.rows()) > n)
    throw DomainError("vprime_srswor: more psi rows than sampled units");
  // Centered form of sum z z^T - (1/n)(sum z)(sum z)^T over A, with z = 0 on units of A in B.
  const auto nd = static_cast<double>(n);
  const Vector centre = sampled_psi.colwise().sum().transpose() / nd;
  const Matrix dev = sampled_psi.rowwise() - centre.transpose();
  const auto zeros = nd - static_cast<double>(sampled_psi.rows());
  const Matrix s2 = (dev.transpose() * dev + zeros * centre * centre.transpose()) / (nd - 1.0);
  return symmetrized((1.0 - f) / f * s2);
}

Matrix vprime_stratified(std::span<const StratumVariance> strata) {
  if (strata.empty()) throw DomainError("vprime_stratified: no strata");
  double total = 0.0;
  Matrix acc = Matrix::Zero(strata.front().v_prime.rows(), strata.front().v_prime.cols());
  for (const auto& s : strata) {
    if (!(s.fraction > 0.0)) throw DomainError("vprime_stratified: F_h must be positive");
    total += s.fraction;
    acc += s.fraction * s.v_prime;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw DomainError("vprime_stratified: stratum fractions must sum to one");
  return acc;
}

Matrix vprime_stratified_srswor(std::span<const StratumSample> strata) {
  if (strata.empty()) throw DomainError("vprime_stratified_srswor: no strata");
  double big_n = 0.0;
  for (const auto& s : strata) big_n += static_cast<double>(s.N);
  std::vector<StratumVariance> parts;
  parts.reserve(strata.size());
  for (const auto& s : strata) {
    if (s.N == 0) throw DomainError("vprime_stratified_srswor: empty stratum");
    if (s.n == 0 || s.n > s.N)
      throw DomainError("vprime_stratified_srswor: stratum sample size out of range");
    const double f = static_cast<double>(s.n) / static_cast<double>(s.N);
    parts.push_back({static_cast<double>(s.N) / big_n, vprime_srswor(s.psi, s.n, f)});
  }
  return vprime_stratified(parts);
}

Matrix vprime_stratified_srswor(const EstimatingFunction& ef, std::span<const Observation> pop,
                                std::span<const StratumDesign> strata, const Vector& theta,
                                std::span<const std::uint8_t> big_set) {
  if (!big_set.empty() && big_set.size() != pop.size())
    throw DomainError("vprime_stratified_srswor: big-data indicator length mismatch");
  std::vector<StratumSample> samples;
  samples.reserve(strata.size());
  for (const auto& st : strata) {
    StratumSample s;
    s.n = st.sampled.size();
    s.N = st.N;
    std::vector<std::size_t> rows;
    for (std::size_t i : st.sampled) {
      if (i >= pop.size()) throw DomainError("vprime_stratified_srswor: index out of range");
      if (big_set.empty() || !big_set[i]) rows.push_back(i);
    }
    s.psi.resize(static_cast<Eigen::Index>(rows.size()), ef.dim());
    for (std::size_t r = 0; r < rows.size(); ++r)
      s.psi.row(static_cast<Eigen::Index>(r)) = ef.psi(pop[rows[r]].y, theta).transpose();
    samples.push_back(std::move(s));
  }
  return vprime_stratified_srswor(samples);
}

Matrix v_super_iid(const EstimatingFunction& ef, std::span<const Observation> pop,
                   std::span<const double> w, const Vector& theta) {
  if (pop.size() != w.size()) throw DomainError("v_super_iid: length mismatch");
  Matrix acc = Matrix::Zero(ef.dim(), ef.dim());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    const Vector psi = ef.psi(pop[i].y, theta);
    acc.noalias() += w[i] * psi * psi.transpose();
  }
  return acc / static_cast<double>(w.size());
}

double v_super_iid(const EstimatingFunction& ef, std::span<const double> y,
                   std::span<const double> w, double theta) {
  if (!ef.has_scalar_psi()) throw DomainError("v_super_iid: statistic is not scalar");
  if (y.size() != w.size()) throw DomainError("v_super_iid: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    const double psi = ef.psi_scalar(y[i], theta);
    acc += w[i] * psi * psi;
  }
  return acc / static_cast<double>(w.size());
}

VarianceReport assemble(const Matrix& jac, const Matrix& v_prime,
                        const std::optional<Matrix>& v_super, std::size_t N) {
  if (N == 0) throw DomainError("assemble: population size must be positive");
  if (jac.rows() != jac.cols() || jac.rows() != v_prime.rows())
    throw DomainError("assemble: dimension mismatch");
  require_symmetric(v_prime, "assemble(v_prime)");
  if (v_super) require_symmetric(*v_super, "assemble(v_super)");
  const Eigen::FullPivLU<Matrix> lu(jac);
  if (!lu.isInvertible()) throw SolverError("assemble: Jacobian is singular");
  const Matrix inv = lu.inverse();
  const double inv_n = 1.0 / static_cast<double>(N);

  VarianceReport r;
  r.v_prime = v_prime;
  r.v_super = v_super;
  r.jac = jac;
  r.N = N;
  r.design_var = symmetrized(inv_n * inv * v_prime * inv.transpose());
  if (v_super) r.joint_var = symmetrized(inv_n * inv * (v_prime + *v_super) * inv.transpose());
  return r;
}

}  // namespace bdsurvey
