#include "bdsurvey/design.hpp"

#include "bdsurvey/error.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>

namespace bdsurvey {

StratifiedFrame StratifiedFrame::from_labels(std::span<const int> labels) {
  std::map<int, std::size_t> index;
  for (int l : labels) index.emplace(l, 0);
  StratifiedFrame frame;
  for (auto& [label, h] : index) {
    h = frame.labels_.size();
    frame.labels_.push_back(label);
  }
  frame.members_.resize(frame.labels_.size());
  frame.stratum_of_.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t h = index[labels[i]];
    frame.members_[h].push_back(i);
    frame.stratum_of_[i] = h;
  }
  frame.n_ = labels.size();
  return frame;
}

StratifiedFrame StratifiedFrame::from_population(std::span<const Observation> pop) {
  std::vector<int> labels(pop.size());
  std::transform(pop.begin(), pop.end(), labels.begin(),
                 [](const Observation& o) { return o.stratum; });
  return from_labels(labels);
}

StratifiedFrame StratifiedFrame::single(std::size_t n) {
  const std::vector<int> labels(n, 0);
  return from_labels(labels);
}

double StratifiedFrame::fraction(std::size_t h) const {
  std::size_t total = 0;
  for (const auto& m : members_) total += m.size();
  return static_cast<double>(stratum_size(h)) / static_cast<double>(total);
}

StratifiedFrame StratifiedFrame::excluding(std::span<const std::uint8_t> exclude) const {
  if (exclude.size() != n_) throw DomainError("StratifiedFrame: exclusion length mismatch");
  StratifiedFrame out = *this;
  for (auto& m : out.members_)
    m.erase(std::remove_if(m.begin(), m.end(), [&](std::size_t i) { return exclude[i] != 0; }),
            m.end());
  return out;
}

std::size_t AllocationPlan::total() const { return std::accumulate(n.begin(), n.end(), std::size_t{0}); }

std::vector<std::size_t> srswor(std::size_t N, std::size_t n, RngStream& rng) {
  if (n > N) throw DomainError("srswor: sample size exceeds population size");
  std::vector<std::size_t> out;
  out.reserve(n);
  // Selection sampling: unit t is taken with probability (n - m) / (N - t).
  for (std::size_t t = 0; t < N && out.size() < n; ++t) {
    const auto remaining = static_cast<double>(N - t);
    const auto needed = static_cast<double>(n - out.size());
    if (remaining * rng.uniform() < needed) out.push_back(t);
  }
  return out;
}

namespace {

double stratum_sd(std::span<const std::size_t> members, std::span<const double> y) {
  const auto n = static_cast<double>(members.size());
  double mean = 0.0;
  for (std::size_t i : members) mean += y[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i : members) ss += (y[i] - mean) * (y[i] - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

AllocationPlan neyman_allocate(const StratifiedFrame& frame, std::span<const double> y,
                               std::size_t n_total) {
  if (y.size() != frame.population_size()) throw DomainError("neyman_allocate: length mismatch");
  const std::size_t H = frame.strata();
  if (H == 0) throw DomainError("neyman_allocate: empty frame");
  std::size_t capacity = 0;
  std::vector<double> score(H);
  for (std::size_t h = 0; h < H; ++h) {
    const std::size_t nh = frame.stratum_size(h);
    if (nh < 2) throw DomainError("neyman_allocate: every stratum needs at least two units");
    capacity += nh;
    score[h] = static_cast<double>(nh) * stratum_sd(frame.members(h), y);
  }
  if (n_total < 2 * H || n_total > capacity)
    throw DomainError("neyman_allocate: infeasible total sample size");

  std::vector<double> target(H, 0.0);
  std::vector<bool> fixed(H, false);
  for (bool changed = true; changed;) {
    changed = false;
    double remaining = static_cast<double>(n_total);
    double mass = 0.0;
    double size_mass = 0.0;
    for (std::size_t h = 0; h < H; ++h) {
      if (fixed[h]) {
        remaining -= target[h];
      } else {
        mass += score[h];
        size_mass += static_cast<double>(frame.stratum_size(h));
      }
    }
    const bool proportional = !(mass > 0.0);
    for (std::size_t h = 0; h < H; ++h) {
      if (fixed[h]) continue;
      const double share = proportional ? static_cast<double>(frame.stratum_size(h)) / size_mass
                                        : score[h] / mass;
      target[h] = remaining * share;
    }
    for (std::size_t h = 0; h < H; ++h) {
      if (fixed[h]) continue;
      const auto cap = static_cast<double>(frame.stratum_size(h));
      if (target[h] < 2.0) {
        target[h] = 2.0;
        fixed[h] = changed = true;
      } else if (target[h] > cap) {
        target[h] = cap;
        fixed[h] = changed = true;
      }
    }
  }

  AllocationPlan plan;
  plan.n.resize(H);
  std::size_t assigned = 0;
  std::vector<std::pair<double, std::size_t>> remainders;
  for (std::size_t h = 0; h < H; ++h) {
    const double fl = std::floor(target[h] + 1e-9);
    plan.n[h] = static_cast<std::size_t>(fl);
    assigned += plan.n[h];
    remainders.emplace_back(target[h] - fl, h);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n_total; k = (k + 1) % H) {
    const std::size_t h = remainders[k].second;
    if (plan.n[h] < frame.stratum_size(h)) {
      ++plan.n[h];
      ++assigned;
    }
  }
  plan.f.resize(H);
  for (std::size_t h = 0; h < H; ++h)
    plan.f[h] = static_cast<double>(plan.n[h]) / static_cast<double>(frame.stratum_size(h));
  plan.total_fraction = static_cast<double>(n_total) / static_cast<double>(capacity);
  return plan;
}

StratifiedSample stratified_srswor(const StratifiedFrame& frame, const AllocationPlan& plan,
                                   RngStream& rng, std::span<const std::uint8_t> exclude) {
  const std::size_t N = frame.population_size();
  const std::size_t H = frame.strata();
  if (plan.n.size() != H) throw DomainError("stratified_srswor: plan does not match frame");
  if (!exclude.empty() && exclude.size() != N)
    throw DomainError("stratified_srswor: exclusion length mismatch");
  const StratifiedFrame eligible = exclude.empty() ? frame : frame.excluding(exclude);

  struct Layout {
    std::vector<std::ptrdiff_t> stratum;  // -1 for excluded units
    std::vector<double> pij;
  };
  auto layout = std::make_shared<Layout>();
  layout->stratum.assign(N, -1);
  layout->pij.resize(H);

  Indicator alpha(N, 1);
  std::vector<double> pi(N, 1.0);
  StratifiedSample out{{}, MembershipRealization({}, {}), {}};
  out.strata.resize(H);
  for (std::size_t h = 0; h < H; ++h) {
    const auto members = eligible.members(h);
    const std::size_t Nh = members.size();
    const std::size_t nh = plan.n[h];
    if (nh > Nh) throw DomainError("stratified_srswor: stratum exhausted by exclusion");
    const double pih = Nh > 0 ? static_cast<double>(nh) / static_cast<double>(Nh) : 0.0;
    layout->pij[h] = Nh > 1 ? pih * (static_cast<double>(nh) - 1.0) /
                                  (static_cast<double>(Nh) - 1.0)
                            : pih;
    for (std::size_t i : members) {
      layout->stratum[i] = static_cast<std::ptrdiff_t>(h);
      alpha[i] = 0;
      pi[i] = pih;
    }
    auto& design = out.strata[h];
    design.N = Nh;
    for (std::size_t pos : srswor(Nh, nh, rng)) {
      const std::size_t i = members[pos];
      design.sampled.push_back(i);
      alpha[i] = 1;
    }
    out.sampled.insert(out.sampled.end(), design.sampled.begin(), design.sampled.end());
  }
  std::sort(out.sampled.begin(), out.sampled.end());
  if (!exclude.empty()) {
    StratumDesign enumerated;
    for (std::size_t i = 0; i < N; ++i)
      if (exclude[i]) enumerated.sampled.push_back(i);
    enumerated.N = enumerated.sampled.size();
    if (enumerated.N > 0) out.strata.push_back(std::move(enumerated));
  }

  auto pi_copy = std::make_shared<std::vector<double>>(pi);
  out.membership = MembershipRealization(
      std::move(alpha), std::move(pi), [layout, pi_copy](std::size_t i, std::size_t j) {
        const auto& p = *pi_copy;
        if (i == j) return p[i];
        const auto hi = layout->stratum[i];
        if (hi >= 0 && hi == layout->stratum[j]) return layout->pij[static_cast<std::size_t>(hi)];
        return p[i] * p[j];
      });
  return out;
}

Indicator bigdata_select(std::span<const double> y, const BigDataMechanism& mech,
                         RngStream& rng) {
  if (!(mech.low_rate > 0.0 && mech.low_rate <= 1.0))
    throw DomainError("bigdata_select: low_rate must lie in (0, 1]");
  if (mech.target_size > y.size())
    throw DomainError("bigdata_select: target size exceeds population size");
  // Exponential keys E_i / w_i; the smallest target_size keys form a sample
  // equivalent to successive draws with probability proportional to w_i.
  std::vector<std::pair<double, std::size_t>> keys(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double w = y[i] >= mech.threshold ? 1.0 : mech.low_rate;
    keys[i] = {rng.exponential() / w, i};
  }
  Indicator delta(y.size(), 0);
  if (mech.target_size == 0) return delta;
  std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(mech.target_size - 1),
                   keys.end());
  for (std::size_t k = 0; k < mech.target_size; ++k) delta[keys[k].second] = 1;
  return delta;
}

double enumerated_stratum_ratio(double F2, double f) {
  if (!(F2 > 0.0 && F2 <= 1.0)) throw DomainError("enumerated_stratum_ratio: F2 must lie in (0, 1]");
  if (!(f > 0.0 && f < 1.0)) throw DomainError("enumerated_stratum_ratio: f must lie in (0, 1)");
  if (f > F2 * F2) throw DomainError("enumerated_stratum_ratio: requires f <= F2^2");
  return (F2 * F2 - f) / (1.0 - f);
}

namespace {

double safe_eval(const VarianceFn& fn, std::span<const double> f) {
  const double v = fn(f);
  return std::isfinite(v) ? v : std::numeric_limits<double>::max();
}

// f_h = clamp(lambda * s_h, lo_h, hi_h) with lambda chosen so sum F_h f_h = target.
std::vector<double> feasible_start(const AllocationBounds& b, std::span<const double> shape,
                                   double target) {
  const std::size_t H = shape.size();
  auto fill = [&](double lambda) {
    std::vector<double> f(H);
    for (std::size_t h = 0; h < H; ++h) f[h] = std::clamp(lambda * shape[h], b.lo[h], b.hi[h]);
    return f;
  };
  auto mass = [&](const std::vector<double>& f) {
    double m = 0.0;
    for (std::size_t h = 0; h < H; ++h) m += b.stratum_fraction[h] * f[h];
    return m;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (mass(fill(hi)) < target && hi < 1e12) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(fill(mid)) < target ? lo : hi) = mid;
  }
  auto f = fill(hi);
  // Absorb residual rounding into the first stratum with room.
  const double gap = target - mass(f);
  for (std::size_t h = 0; h < H && gap != 0.0; ++h) {
    const double moved = std::clamp(f[h] + gap / b.stratum_fraction[h], b.lo[h], b.hi[h]);
    if (moved != f[h]) {
      f[h] = moved;
      break;
    }
  }
  return f;
}

}  // namespace

AllocationPlan allocate_optimal(const VarianceFn& variance_fn, double f_total,
                                const AllocationBounds& bounds, const AllocationOptions& opts) {
  const std::size_t H = bounds.stratum_fraction.size();
  if (H == 0 || bounds.lo.size() != H || bounds.hi.size() != H)
    throw DomainError("allocate_optimal: bounds do not match the number of strata");
  double share = 0.0;
  double min_mass = 0.0;
  double max_mass = 0.0;
  for (std::size_t h = 0; h < H; ++h) {
    const double F = bounds.stratum_fraction[h];
    if (!(F > 0.0)) throw DomainError("allocate_optimal: stratum fractions must be positive");
    if (!(0.0 <= bounds.lo[h] && bounds.lo[h] <= bounds.hi[h] && bounds.hi[h] <= 1.0))
      throw DomainError("allocate_optimal: bounds must satisfy 0 <= lo <= hi <= 1");
    share += F;
    min_mass += F * bounds.lo[h];
    max_mass += F * bounds.hi[h];
  }
  if (std::abs(share - 1.0) > 1e-9) throw DomainError("allocate_optimal: F_h must sum to one");
  if (!(f_total >= min_mass - 1e-12 && f_total <= max_mass + 1e-12))
    throw DomainError("allocate_optimal: total fraction is infeasible under the bounds");

  std::vector<std::vector<double>> shapes{std::vector<double>(H, 1.0)};
  for (std::size_t k = 0; k < H && H > 1; ++k) {
    std::vector<double> s(H, 1.0);
    s[k] = 4.0;
    shapes.push_back(s);
    s.assign(H, 1.0);
    s[k] = 0.25;
    shapes.push_back(s);
  }

  AllocationPlan best;
  double best_v = std::numeric_limits<double>::infinity();
  for (const auto& shape : shapes) {
    std::vector<double> f = feasible_start(bounds, shape, f_total);
    double v = safe_eval(variance_fn, f);
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
      double moved = 0.0;
      for (std::size_t a = 0; a < H; ++a) {
        for (std::size_t b = a + 1; b < H; ++b) {
          const double Fa = bounds.stratum_fraction[a];
          const double Fb = bounds.stratum_fraction[b];
          const double t_lo = std::max(Fa * (bounds.lo[a] - f[a]), Fb * (f[b] - bounds.hi[b]));
          const double t_hi = std::min(Fa * (bounds.hi[a] - f[a]), Fb * (f[b] - bounds.lo[b]));
          if (!(t_hi > t_lo)) continue;
          const double fa0 = f[a];
          const double fb0 = f[b];
          std::vector<double> trial = f;
          auto eval = [&](double t) {
            trial[a] = std::clamp(fa0 + t / Fa, bounds.lo[a], bounds.hi[a]);
            trial[b] = std::clamp(fb0 - t / Fb, bounds.lo[b], bounds.hi[b]);
            return safe_eval(variance_fn, trial);
          };
          double t_best = 0.0;
          double v_best = v;
          const auto [t_min, v_min] = boost::math::tools::brent_find_minima(eval, t_lo, t_hi, 40);
          for (auto [t, vt] : {std::pair{t_min, v_min}, std::pair{t_lo, eval(t_lo)},
                               std::pair{t_hi, eval(t_hi)}}) {
            if (vt < v_best) {
              v_best = vt;
              t_best = t;
            }
          }
          if (t_best != 0.0) {
            eval(t_best);
            moved = std::max({moved, std::abs(trial[a] - fa0), std::abs(trial[b] - fb0)});
            f = trial;
            v = v_best;
          }
        }
      }
      if (moved < opts.tol) break;
    }
    if (v < best_v) {
      best_v = v;
      best.f = f;
    }
  }
  best.total_fraction = f_total;
  best.variance = best_v;
  return best;
}

}  // namespace bdsurvey
