#pragma once

#include "bdsurvey/rng.hpp"
#include "bdsurvey/types.hpp"
#include "bdsurvey/variance.hpp"
#include "bdsurvey/weights.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace bdsurvey {

/// Partition of the population index set into strata 0..H-1.
class StratifiedFrame {
 public:
  /// Labels may be any integers; strata are numbered in increasing label order.
  static StratifiedFrame from_labels(std::span<const int> labels);
  static StratifiedFrame from_population(std::span<const Observation> pop);
  static StratifiedFrame single(std::size_t n);

  std::size_t strata() const { return members_.size(); }
  std::size_t population_size() const { return n_; }
  std::span<const std::size_t> members(std::size_t h) const { return members_.at(h); }
  std::size_t stratum_size(std::size_t h) const { return members_.at(h).size(); }
  /// F_h = N_h / N.
  double fraction(std::size_t h) const;
  int label(std::size_t h) const { return labels_.at(h); }
  std::size_t stratum_of(std::size_t i) const { return stratum_of_.at(i); }

  /// Same strata with the flagged units removed. The population index space is
  /// unchanged, so members still refer to the original units.
  StratifiedFrame excluding(std::span<const std::uint8_t> exclude) const;

 private:
  std::vector<std::vector<std::size_t>> members_;
  std::vector<int> labels_;
  std::vector<std::size_t> stratum_of_;
  std::size_t n_ = 0;
};

struct AllocationPlan {
  std::vector<std::size_t> n;  // per-stratum sample sizes; empty for fraction-only plans
  std::vector<double> f;       // per-stratum sampling fractions
  double total_fraction = 0.0;
  std::optional<double> variance;

  std::size_t total() const;
};

/// Size-n simple random sample without replacement from {0..N-1}, sorted.
std::vector<std::size_t> srswor(std::size_t N, std::size_t n, RngStream& rng);

/// n_h proportional to N_h S_h, rounded by largest remainder to sum to
/// n_total, clamped to [2, N_h]. S_h is the stratum standard deviation of y
/// (divisor N_h - 1).
AllocationPlan neyman_allocate(const StratifiedFrame& frame, std::span<const double> y,
                               std::size_t n_total);

struct StratifiedSample {
  std::vector<std::size_t> sampled;       // A, sorted
  MembershipRealization membership;       // over the full population
  std::vector<StratumDesign> strata;      // A_h with post-exclusion N_h, then the
                                          // enumerated stratum when units are excluded
};

/// Independent SRSWOR within each stratum of frame minus exclude. Excluded units
/// form a completely enumerated stratum (alpha = pi = 1).
StratifiedSample stratified_srswor(const StratifiedFrame& frame, const AllocationPlan& plan,
                                   RngStream& rng,
                                   std::span<const std::uint8_t> exclude = {});

struct BigDataMechanism {
  double threshold = 0.0;   // units with y >= threshold are "high"
  double low_rate = 1.0;    // relative selection rate of low units
  std::size_t target_size = 0;
};

/// Successive weighted draws without replacement, weight 1 for high units and
/// low_rate for low units. Only the membership indicator is returned.
Indicator bigdata_select(std::span<const double> y, const BigDataMechanism& mech,
                         RngStream& rng);

/// (F2^2 - f) / (1 - f).
double enumerated_stratum_ratio(double F2, double f);

struct AllocationBounds {
  std::vector<double> stratum_fraction;  // F_h
  std::vector<double> lo;
  std::vector<double> hi;
};

using VarianceFn = std::function<double(std::span<const double>)>;

struct AllocationOptions {
  double tol = 1e-6;
  int max_sweeps = 200;
};

/// Minimizes variance_fn over {sum_h F_h f_h = f_total, lo_h <= f_h <= hi_h}
/// by pairwise coordinate descent from several starting points.
AllocationPlan allocate_optimal(const VarianceFn& variance_fn, double f_total,
                                const AllocationBounds& bounds,
                                const AllocationOptions& opts = {});

}  // namespace bdsurvey
