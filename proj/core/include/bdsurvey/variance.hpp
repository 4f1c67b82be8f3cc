#pragma once

#include "bdsurvey/estfun.hpp"
#include "bdsurvey/types.hpp"
#include "bdsurvey/weights.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bdsurvey {

/// Design and joint variance of theta_hat assembled from the sandwich pieces.
struct VarianceReport {
  Matrix v_prime;                // design variance of sqrt(N) Psi_s
  std::optional<Matrix> v_super; // superpopulation variance of sqrt(N) Psi_N
  Matrix jac;                    // estimated Jacobian of Psi at theta_0
  Matrix design_var;             // (1/N) jac^-1 v_prime jac^-T
  std::optional<Matrix> joint_var;
  std::size_t N = 0;
};

/// Weighted Gaussian kernel density estimate with a weighted Silverman bandwidth
/// 0.9 min(sd_w, IQR_w / 1.34) m^(-1/5), m = (sum w)^2 / sum w^2.
class DensityEstimate {
 public:
  DensityEstimate(std::span<const double> y, std::span<const double> w);
  double operator()(double y) const;
  double bandwidth() const { return bandwidth_; }

 private:
  std::vector<double> y_;
  std::vector<double> w_;
  double total_w_ = 0.0;
  double bandwidth_ = 0.0;
};

/// (1/N) sum_i w_i psi_dot(Y_i; theta). Quantiles are rejected; use
/// density_jacobian for them.
Matrix jacobian_avg(const EstimatingFunction& ef, std::span<const Observation> pop,
                    std::span<const double> w, const Vector& theta);
/// Scalar-statistic overload on raw values.
double jacobian_avg(const EstimatingFunction& ef, std::span<const double> y,
                    std::span<const double> w, double theta);

/// 1x1 Jacobian estimate f_hat(theta) for a quantile statistic.
Matrix density_jacobian(std::span<const double> y, std::span<const double> w, double theta);

/// Horvitz-Thompson estimator of Var(sqrt(N) Psi_s | Y):
///   (1/N) sum_{i,j in A\B} (1/(pi_i pi_j) - 1/pi_ij) psi_i psi_j^T.
/// An empty big_set gives the survey-only form.
Matrix vprime_ht(const EstimatingFunction& ef, std::span<const Observation> pop,
                 const MembershipRealization& m, const Vector& theta,
                 std::span<const std::uint8_t> big_set = {});

/// SRSWOR form: ((1-f)/f) S^2 with S^2 computed from the rows of sampled_psi
/// (units in A\B) and divisors n-1 and n, n = |A|.
Matrix vprime_srswor(const Matrix& sampled_psi, std::size_t n, double f);

struct StratumVariance {
  double fraction;  // F_h = N_h / N
  Matrix v_prime;   // V'_h
};

/// sum_h F_h V'_h.
Matrix vprime_stratified(std::span<const StratumVariance> strata);

/// One stratum of a stratified SRSWOR sample.
struct StratumSample {
  Matrix psi;              // rows: psi(Y_i; theta) for i in A_h \ B_h
  std::size_t n = 0;       // |A_h|
  std::size_t N = 0;       // N_h
};

/// SRSWOR within each stratum (f_h = n_h / N_h), combined with F_h = N_h / sum N.
Matrix vprime_stratified_srswor(std::span<const StratumSample> strata);

/// Index-level description of a stratum's survey sample.
struct StratumDesign {
  std::vector<std::size_t> sampled;  // A_h, indices into the population
  std::size_t N = 0;                 // N_h
};

/// Evaluates psi on each A_h \ B_h and applies the stratified SRSWOR form.
Matrix vprime_stratified_srswor(const EstimatingFunction& ef, std::span<const Observation> pop,
                                std::span<const StratumDesign> strata, const Vector& theta,
                                std::span<const std::uint8_t> big_set = {});

/// (1/N) sum_i w_i psi_i psi_i^T, the i.i.d. superpopulation variance of
/// sqrt(N) Psi_N.
Matrix v_super_iid(const EstimatingFunction& ef, std::span<const Observation> pop,
                   std::span<const double> w, const Vector& theta);
double v_super_iid(const EstimatingFunction& ef, std::span<const double> y,
                   std::span<const double> w, double theta);

VarianceReport assemble(const Matrix& jac, const Matrix& v_prime,
                        const std::optional<Matrix>& v_super, std::size_t N);

}  // namespace bdsurvey
