#include "bdsurvey/weights.hpp"

#include "bdsurvey/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bdsurvey {

WeightVector::WeightVector(std::vector<double> w, WeightScheme scheme, bool design_unbiased,
                           bool normalized)
    : w_(std::move(w)),
      scheme_(scheme),
      design_unbiased_(design_unbiased),
      normalized_(normalized) {
  for (double wi : w_)
    if (!(wi >= 0.0) || !std::isfinite(wi))
      throw DomainError("WeightVector: weights must be finite and nonnegative");
}

WeightVector WeightVector::unit(std::size_t n) {
  return WeightVector(std::vector<double>(n, 1.0), WeightScheme::Unit, true);
}

WeightVector WeightVector::big_data_only(std::span<const std::uint8_t> delta) {
  std::vector<double> w(delta.size());
  std::transform(delta.begin(), delta.end(), w.begin(),
                 [](std::uint8_t d) { return d ? 1.0 : 0.0; });
  return WeightVector(std::move(w), WeightScheme::BigDataOnly, false);
}

std::size_t WeightVector::sample_size() const {
  return static_cast<std::size_t>(
      std::count_if(w_.begin(), w_.end(), [](double wi) { return wi != 0.0; }));
}

double WeightVector::mean() const {
  if (w_.empty()) return 0.0;
  return std::accumulate(w_.begin(), w_.end(), 0.0) / static_cast<double>(w_.size());
}

MembershipRealization::MembershipRealization(Indicator alpha, std::vector<double> pi,
                                             SecondOrderFn pi2)
    : alpha_(std::move(alpha)), pi_(std::move(pi)), pi2_(std::move(pi2)) {
  if (alpha_.size() != pi_.size())
    throw DomainError("MembershipRealization: alpha and pi differ in length");
  for (std::uint8_t a : alpha_)
    if (a > 1) throw DomainError("MembershipRealization: alpha must be 0/1");
}

MembershipRealization MembershipRealization::srswor(Indicator alpha) {
  const auto big_n = static_cast<double>(alpha.size());
  const auto n = static_cast<double>(std::count(alpha.begin(), alpha.end(), 1));
  const double pi = n / big_n;
  const double pij = big_n > 1 ? n * (n - 1.0) / (big_n * (big_n - 1.0)) : pi;
  std::vector<double> pis(alpha.size(), pi);
  return MembershipRealization(std::move(alpha), std::move(pis),
                               [pi, pij](std::size_t i, std::size_t j) {
                                 return i == j ? pi : pij;
                               });
}

double MembershipRealization::pi2(std::size_t i, std::size_t j) const {
  if (i == j) return pi_[i];
  if (!pi2_) throw DesignInformationError("second-order inclusion probabilities unavailable");
  return pi2_(i, j);
}

WeightVector horvitz_thompson(const MembershipRealization& m) {
  std::vector<double> w(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double pi = m.pi()[i];
    if (!(pi > 0.0) || pi > 1.0)
      throw DomainError("horvitz_thompson: inclusion probabilities must lie in (0, 1]");
    w[i] = m.alpha()[i] ? 1.0 / pi : 0.0;
  }
  return WeightVector(std::move(w), WeightScheme::HorvitzThompson, true);
}

WeightVector integrate(std::span<const std::uint8_t> delta, const WeightVector& w) {
  if (delta.size() != w.size()) throw DomainError("integrate: length mismatch");
  if (!w.design_unbiased())
    throw DomainError("integrate: survey weights must be design unbiased");
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (delta[i] > 1) throw DomainError("integrate: delta must be 0/1");
    out[i] = delta[i] ? 1.0 : w[i];
  }
  return WeightVector(std::move(out), WeightScheme::DataIntegrated, true);
}

WeightVector normalize(const WeightVector& w) {
  if (w.normalized()) return w;
  const double m = w.mean();
  if (!(m > 0.0)) throw DomainError("normalize: weights have zero mean");
  std::vector<double> out(w.values().begin(), w.values().end());
  for (double& wi : out) wi /= m;
  return WeightVector(std::move(out), w.scheme(), false, true);
}

}  // namespace bdsurvey
