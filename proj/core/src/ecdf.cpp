#include "bdsurvey/ecdf.hpp"

#include "bdsurvey/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bdsurvey {

WeightedEcdf::WeightedEcdf(std::span<const double> y, std::span<const double> w)
    : population_size_(w.size()) {
  if (y.size() != w.size()) throw DomainError("WeightedEcdf: y and w differ in length");
  if (w.empty()) throw DomainError("WeightedEcdf: empty population");

  std::vector<std::size_t> idx;
  idx.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0) {
      if (!(w[i] > 0.0) || !std::isfinite(w[i]))
        throw DomainError("WeightedEcdf: weights must be finite and nonnegative");
      idx.push_back(i);
    }
  }
  std::vector<double> yv(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    yv[k] = y[idx[k]];
    if (!std::isfinite(yv[k])) throw DomainError("WeightedEcdf: non-finite observation");
  }
  std::vector<std::size_t> order(idx.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return yv[a] < yv[b] || (yv[a] == yv[b] && a < b);
  });

  const double inv_n = 1.0 / static_cast<double>(population_size_);
  double raw = 0.0;
  double raw_moment = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double value = yv[order[k]];
    const double weight = w[idx[order[k]]];
    if (support_.empty() || support_.back() != value) {
      support_.push_back(value);
      point_mass_.push_back(0.0);
      raw_cum_.push_back(raw);
      cum_moment_.push_back(0.0);
    }
    raw += weight;
    raw_moment += weight * value;
    point_mass_.back() += weight * inv_n;
    raw_cum_.back() = raw;
    cum_moment_.back() = raw_moment * inv_n;
  }
  cum_mass_.resize(raw_cum_.size());
  for (std::size_t k = 0; k < raw_cum_.size(); ++k) cum_mass_[k] = raw_cum_[k] * inv_n;
  raw_total_ = raw;
  mass_ = raw * inv_n;
  moment_x_ = raw_moment * inv_n;
  for (std::size_t k = 0; k < support_.size(); ++k)
    moment_xF_ += point_mass_[k] * cum_mass_[k] * support_[k];
}

double WeightedEcdf::operator()(double y) const {
  const auto it = std::upper_bound(support_.begin(), support_.end(), y);
  if (it == support_.begin()) return 0.0;
  return cum_mass_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double WeightedEcdf::lower_moment(double y) const {
  const auto it = std::lower_bound(support_.begin(), support_.end(), y);
  if (it == support_.begin()) return 0.0;
  return cum_moment_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double WeightedEcdf::quantile(double p, std::size_t* support_index) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0, 1)");
  if (support_.empty()) throw DomainError("quantile: empty effective sample");
  const double target = p * raw_total_;
  auto it = std::lower_bound(raw_cum_.begin(), raw_cum_.end(), target);
  if (it == raw_cum_.end()) --it;  // rounding in the last partial sum
  const auto k = static_cast<std::size_t>(it - raw_cum_.begin());
  if (support_index) *support_index = k;
  return support_[k];
}

}  // namespace bdsurvey
