#pragma once

#include "bdsurvey/design.hpp"
#include "bdsurvey/error.hpp"
#include "bdsurvey/estfun.hpp"
#include "bdsurvey/rng.hpp"
#include "bdsurvey/types.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bdsurvey {

/// Monotone piecewise-cubic Hermite CDF through the knots (x_i, F_i).
/// Three-point tangents are passed through the Hyman filter, which keeps
/// every segment nondecreasing. F = 0 left of the first knot and 1 right of
/// the last.
class MonotoneCdf {
 public:
  MonotoneCdf(std::vector<double> x, std::vector<double> F);

  double cdf(double y) const;
  double operator()(double y) const { return cdf(y); }
  double pdf(double y) const;
  /// inf{y : F(y) >= u} by bisection inside the bracketing segment.
  double quantile(double u) const;
  /// E[Y] = x_0 + integral of (1 - F) over the support (exact for the cubic).
  double mean() const;

  double lower() const { return x_.front(); }
  double upper() const { return x_.back(); }
  std::span<const double> knots() const { return x_; }
  std::span<const double> values() const { return F_; }
  std::span<const double> slopes() const { return d_; }
  std::vector<double> breakpoints() const { return x_; }

 private:
  std::vector<double> x_;
  std::vector<double> F_;
  std::vector<double> d_;
};

/// Bracketed income distribution of one stratum.
struct StratumCdfSpec {
  double proportion = 0.0;         // p_h
  double median = 0.0;             // eta_h
  double mean = 0.0;               // mu_h
  std::vector<double> brackets;    // weekly upper bounds b_1..b_{m-1}; b_m is solved
  std::vector<double> frequencies; // r_1..r_m in percent
  double population_median = 0.0;  // eta
};

struct FittedStratum {
  MonotoneCdf cdf;
  double top_bracket = 0.0;  // solved b_m, weekly units
};

/// Knots (0, 0), (52 eta_h b_i / eta, sum_{j<=i} r_j / 100); b_m is chosen so
/// the fitted mean equals mu_h.
FittedStratum fit_stratum_cdf(const StratumCdfSpec& spec);

class SuperpopModel {
 public:
  SuperpopModel(std::vector<double> proportions, std::vector<MonotoneCdf> strata);

  std::size_t strata() const { return strata_.size(); }
  std::span<const double> proportions() const { return p_; }
  const MonotoneCdf& stratum(std::size_t h) const { return strata_.at(h); }

  double cdf(double y) const;
  double pdf(double y) const;
  double quantile(double u) const;
  std::vector<double> breakpoints() const;

  struct Draw {
    double value;
    int stratum;
  };
  Draw sample(RngStream& rng) const;

  struct Sample {
    std::vector<double> y;
    std::vector<int> stratum;
  };
  Sample sample(std::size_t n, RngStream& rng) const;

 private:
  std::vector<double> p_;
  std::vector<double> cum_p_;
  std::vector<MonotoneCdf> strata_;
};

/// F = sum_h p_h F_h.
SuperpopModel mixture(std::vector<double> p, std::vector<MonotoneCdf> cdfs);

struct SuperpopSpec {
  std::string label;
  double population_median = 0.0;
  std::vector<StratumCdfSpec> strata;
};

SuperpopSpec parse_superpop_spec(std::string_view json_text);
SuperpopSpec load_superpop_spec(const std::filesystem::path& path);
SuperpopModel build_model(const SuperpopSpec& spec);

/// Distribution with a CDF on [breakpoints().front(), breakpoints().back()]
/// (the last breakpoint may be +infinity) and support in [0, infinity).
template <class M>
concept CdfModel = requires(const M& m, double y) {
  { m.cdf(y) } -> std::convertible_to<double>;
  { m.breakpoints() } -> std::convertible_to<std::vector<double>>;
};

struct TrueFunctionals {
  double median = 0.0;
  double gini = 0.0;
  double mean = 0.0;
};

namespace detail {

template <class F>
double integrate_pieces(const F& f, const std::vector<double>& breaks, double tol) {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  double total_err = 0.0;
  double total_l1 = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    if (!(breaks[k + 1] > breaks[k])) continue;
    double err = 0.0;
    double l1 = 0.0;
    const double piece = gauss_kronrod<double, 31>::integrate(f, breaks[k], breaks[k + 1], 15,
                                                             tol, &err, &l1);
    if (!std::isfinite(piece)) throw NumericError("true_functionals: quadrature diverged");
    // Integrands take values in [0, 1], so no piece can be off by more than its width.
    if (std::isfinite(breaks[k + 1])) err = std::min(err, breaks[k + 1] - breaks[k]);
    total += piece;
    total_err += err;
    total_l1 += l1;
  }
  if (total_err > std::max(1e-8 * total_l1, 1e-300))
    throw NumericError("true_functionals: quadrature did not converge");
  return total;
}

}  // namespace detail

/// Median by bisection on F; mean and Gini by adaptive Gauss-Kronrod
/// quadrature of integral (1 - F) and E[Y]^-1 integral F (1 - F).
template <CdfModel M>
TrueFunctionals true_functionals(const M& model, double quad_tol = 1e-12) {
  std::vector<double> breaks = model.breakpoints();
  if (breaks.size() < 2) throw DomainError("true_functionals: need at least two breakpoints");
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  if (breaks.front() < 0.0) throw DomainError("true_functionals: support must be nonnegative");

  TrueFunctionals out;
  const auto survival = [&](double y) { return 1.0 - static_cast<double>(model.cdf(y)); };
  const auto spread = [&](double y) {
    const double F = model.cdf(y);
    return F * (1.0 - F);
  };
  out.mean = breaks.front() + detail::integrate_pieces(survival, breaks, quad_tol);
  if (!(out.mean > 0.0)) throw DomainError("true_functionals: mean must be positive");
  out.gini = detail::integrate_pieces(spread, breaks, quad_tol) / out.mean;

  double lo = breaks.front();
  double hi = breaks.back();
  if (!std::isfinite(hi)) {
    hi = std::max(1.0, breaks[breaks.size() - 2]);
    while (model.cdf(hi) < 0.5) hi *= 2.0;
  }
  for (int it = 0; it < 300 && hi - lo > quad_tol * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (model.cdf(mid) < 0.5 ? lo : hi) = mid;
  }
  out.median = hi;
  return out;
}

enum class SurveyDesign { SurveyOnly, Integrated, StratIntegrated };

std::string to_string(SurveyDesign d);

struct ReferenceDesign {
  SurveyDesign kind = SurveyDesign::SurveyOnly;
  double fraction = 0.0;      // n / N
  double threshold = 0.0;     // big-data mechanism
  double low_rate = 1.0;
  double bigdata_share = 0.0; // |B| / N
};

struct ReferenceVariance {
  Matrix v_prime;        // design variance of sqrt(N) Psi_s at the true value
  double v_super = 0.0;  // i.i.d. superpopulation variance of psi
  double jac = 0.0;      // exact Jacobian at the true value
  double asymptotic = 0.0;  // (v_prime + v_super) / jac^2, size-adjusted
  std::size_t draws = 0;
};

/// Treats M draws from the model as the population and evaluates the
/// stratified SRSWOR design variance with Neyman allocation at the true
/// mean, median (kind Quantile, p = 0.5) or Gini.
ReferenceVariance reference_vprime(const SuperpopModel& model, const TrueFunctionals& truth,
                                   StatisticKind stat, const ReferenceDesign& design,
                                   std::size_t M, RngStream& rng);

}  // namespace bdsurvey
