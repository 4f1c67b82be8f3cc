#pragma once

#include "bdsurvey/types.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace bdsurvey {

enum class WeightScheme { Unit, HorvitzThompson, DataIntegrated, BigDataOnly, Custom };

/// Full-length weight vector over the population index set. The sample is
/// {i : w_i != 0}; every other unit is unobserved.
class WeightVector {
 public:
  WeightVector(std::vector<double> w, WeightScheme scheme, bool design_unbiased,
               bool normalized = false);

  static WeightVector unit(std::size_t n);
  /// Big-data indicators used directly as weights (not design unbiased).
  static WeightVector big_data_only(std::span<const std::uint8_t> delta);

  std::span<const double> values() const { return w_; }
  double operator[](std::size_t i) const { return w_[i]; }
  std::size_t size() const { return w_.size(); }
  WeightScheme scheme() const { return scheme_; }
  bool design_unbiased() const { return design_unbiased_; }
  bool normalized() const { return normalized_; }
  /// Number of units with nonzero weight.
  std::size_t sample_size() const;
  double mean() const;

 private:
  std::vector<double> w_;
  WeightScheme scheme_;
  bool design_unbiased_;
  bool normalized_;
};

/// Survey membership with first- and second-order inclusion probabilities.
class MembershipRealization {
 public:
  using SecondOrderFn = std::function<double(std::size_t, std::size_t)>;

  MembershipRealization(Indicator alpha, std::vector<double> pi, SecondOrderFn pi2 = {});

  /// SRSWOR of size n from N: pi = n/N, pi_ij = n(n-1)/(N(N-1)).
  static MembershipRealization srswor(Indicator alpha);

  std::span<const std::uint8_t> alpha() const { return alpha_; }
  std::span<const double> pi() const { return pi_; }
  std::size_t size() const { return alpha_.size(); }
  bool has_second_order() const { return static_cast<bool>(pi2_); }
  /// pi_ij; pi_ii = pi_i.
  double pi2(std::size_t i, std::size_t j) const;

 private:
  Indicator alpha_;
  std::vector<double> pi_;
  SecondOrderFn pi2_;
};

/// w_i = alpha_i / pi_i.
WeightVector horvitz_thompson(const MembershipRealization& m);

/// w_i = delta_i + (1 - delta_i) w_i.
WeightVector integrate(std::span<const std::uint8_t> delta, const WeightVector& w);

/// w_i / ((1/N) sum_j w_j).
WeightVector normalize(const WeightVector& w);

}  // namespace bdsurvey
