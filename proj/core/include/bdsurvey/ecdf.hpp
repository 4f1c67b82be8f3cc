#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bdsurvey {

/// Weighted empirical distribution F(y) = (1/N) sum_i w_i I(Y_i <= y), where N
/// is the length of the weight vector (the population size). Only units with
/// nonzero weight are read. Tied values are pooled into one support point.
class WeightedEcdf {
 public:
  WeightedEcdf(std::span<const double> y, std::span<const double> w);

  /// Right-continuous step function value at y.
  double operator()(double y) const;

  /// (1/N) sum_j w_j I(Y_j < y) Y_j.
  double lower_moment(double y) const;
  /// (1/N) sum_j w_j I(y <= Y_j) Y_j.
  double upper_tail_moment(double y) const { return moment_x_ - lower_moment(y); }
  /// (1/N) sum_j w_j F(Y_j) Y_j.
  double moment_xF() const { return moment_xF_; }
  /// (1/N) sum_j w_j Y_j.
  double moment_x() const { return moment_x_; }
  /// (1/N) sum_j w_j; equals 1 for normalized weights.
  double mass() const { return mass_; }

  /// inf{y : F(y) >= p * mass()}, i.e. the p-quantile of the normalized
  /// distribution. Returns the index of the support point as well.
  double quantile(double p, std::size_t* support_index = nullptr) const;

  std::span<const double> support() const { return support_; }
  /// Pooled weight (already divided by N) of each support point.
  std::span<const double> point_mass() const { return point_mass_; }
  std::size_t population_size() const { return population_size_; }

 private:
  std::size_t population_size_;
  std::vector<double> support_;
  std::vector<double> point_mass_;
  std::vector<double> cum_mass_;    // (1/N) sum w for Y <= support_[k]
  std::vector<double> cum_moment_;  // (1/N) sum w*Y for Y <= support_[k]
  std::vector<double> raw_cum_;     // unscaled cumulative weight, for quantiles
  double raw_total_ = 0.0;
  double mass_ = 0.0;
  double moment_x_ = 0.0;
  double moment_xF_ = 0.0;
};

}  // namespace bdsurvey
