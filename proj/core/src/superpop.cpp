#include "bdsurvey/superpop.hpp"

#include "bdsurvey/variance.hpp"

#include <boost/math/tools/roots.hpp>
#include "json.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

namespace bdsurvey {

namespace {

void hyman_filter(std::span<const double> x, std::span<const double> F, std::vector<double>& d) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double s0 = i > 0 ? (F[i] - F[i - 1]) / (x[i] - x[i - 1])
                            : (F[1] - F[0]) / (x[1] - x[0]);
    const double s1 = i + 1 < n ? (F[i + 1] - F[i]) / (x[i + 1] - x[i]) : s0;
    const double bound = 3.0 * std::min(std::abs(s0), std::abs(s1));
    double sig = d[i];
    if (s0 * s1 > 0.0) sig = s1;
    d[i] = sig >= 0.0 ? std::min(std::max(0.0, d[i]), bound)
                      : std::max(std::min(0.0, d[i]), -bound);
  }
}

}  // namespace

MonotoneCdf::MonotoneCdf(std::vector<double> x, std::vector<double> F)
    : x_(std::move(x)), F_(std::move(F)) {
  const std::size_t n = x_.size();
  if (n < 2 || F_.size() != n) throw ConstructionError("MonotoneCdf: need at least two knots");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(F_[i]))
      throw ConstructionError("MonotoneCdf: knots must be finite");
    if (i > 0 && !(x_[i] > x_[i - 1]))
      throw ConstructionError("MonotoneCdf: knot abscissae must be strictly increasing");
    if (i > 0 && F_[i] < F_[i - 1]) throw ConstructionError("MonotoneCdf: values must be nondecreasing");
  }
  if (F_.front() != 0.0 || F_.back() != 1.0)
    throw ConstructionError("MonotoneCdf: values must run from 0 to 1");

  std::vector<double> h(n - 1);
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (F_[i + 1] - F_[i]) / h[i];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = delta[0];
  } else {
    d_[0] = ((2.0 * h[0] + h[1]) * delta[0] - h[0] * delta[1]) / (h[0] + h[1]);
    for (std::size_t i = 1; i + 1 < n; ++i)
      d_[i] = (h[i] * delta[i - 1] + h[i - 1] * delta[i]) / (h[i - 1] + h[i]);
    const std::size_t k = n - 2;
    d_[n - 1] = ((2.0 * h[k] + h[k - 1]) * delta[k] - h[k] * delta[k - 1]) / (h[k] + h[k - 1]);
  }
  hyman_filter(x_, F_, d_);

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (delta[i] == 0.0) {
      if (d_[i] != 0.0 || d_[i + 1] != 0.0)
        throw ConstructionError("MonotoneCdf: monotonicity filter failed on a flat segment");
      continue;
    }
    const double a = d_[i] / delta[i];
    const double b = d_[i + 1] / delta[i];
    if (a < 0.0 || b < 0.0 || a > 3.0 + 1e-12 || b > 3.0 + 1e-12)
      throw ConstructionError("MonotoneCdf: monotonicity filter failed");
  }
}

double MonotoneCdf::cdf(double y) const {
  if (!(y > x_.front())) return 0.0;
  if (y >= x_.back()) return 1.0;
  const auto k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), y) - x_.begin()) - 1;
  const double h = x_[k + 1] - x_[k];
  const double t = (y - x_[k]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  // Written as an increment on F_k so that flat runs and knots are reproduced exactly.
  const double v = F_[k] + (3.0 * t2 - 2.0 * t3) * (F_[k + 1] - F_[k]) +
                   h * ((t3 - 2.0 * t2 + t) * d_[k] + (t3 - t2) * d_[k + 1]);
  return std::clamp(v, F_[k], F_[k + 1]);
}

double MonotoneCdf::pdf(double y) const {
  if (y < x_.front() || y > x_.back()) return 0.0;
  std::size_t k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), y) - x_.begin());
  k = std::clamp<std::size_t>(k, 1, x_.size() - 1) - 1;
  const double h = x_[k + 1] - x_[k];
  const double t = (y - x_[k]) / h;
  const double t2 = t * t;
  const double v = (6.0 * t2 - 6.0 * t) * (F_[k] - F_[k + 1]) / h +
                   (3.0 * t2 - 4.0 * t + 1.0) * d_[k] + (3.0 * t2 - 2.0 * t) * d_[k + 1];
  return std::max(v, 0.0);
}

double MonotoneCdf::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("MonotoneCdf::quantile: u must lie in [0, 1]");
  if (u == 0.0) return x_.front();
  const auto k = static_cast<std::size_t>(std::lower_bound(F_.begin(), F_.end(), u) - F_.begin());
  double lo = x_[k - 1];
  double hi = x_[k];
  const double tol = 1e-12 * (hi - lo);
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (cdf(mid) < u ? lo : hi) = mid;
  }
  return hi;
}

double MonotoneCdf::mean() const {
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
    const double h = x_[i + 1] - x_[i];
    area += h * (F_[i] + F_[i + 1]) / 2.0 + h * h * (d_[i] - d_[i + 1]) / 12.0;
  }
  return x_.back() - area;
}

FittedStratum fit_stratum_cdf(const StratumCdfSpec& spec) {
  const std::size_t m = spec.frequencies.size();
  if (m == 0 || spec.brackets.size() + 1 != m)
    throw ConstructionError("fit_stratum_cdf: need one more frequency than bracket bound");
  if (!(spec.median > 0.0 && spec.mean > 0.0 && spec.population_median > 0.0))
    throw ConstructionError("fit_stratum_cdf: medians and mean must be positive");
  double total = 0.0;
  for (double r : spec.frequencies) {
    if (!(r >= 0.0) || !std::isfinite(r))
      throw ConstructionError("fit_stratum_cdf: frequencies must be nonnegative");
    total += r;
  }
  if (std::abs(total - 100.0) > 1e-9)
    throw ConstructionError("fit_stratum_cdf: frequencies must sum to 100");
  for (std::size_t i = 0; i < spec.brackets.size(); ++i)
    if (!(spec.brackets[i] > (i == 0 ? 0.0 : spec.brackets[i - 1])))
      throw ConstructionError("fit_stratum_cdf: brackets must be positive and increasing");

  const double scale = 52.0 * spec.median / spec.population_median;
  std::vector<double> x{0.0};
  std::vector<double> F{0.0};
  double cum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    cum += spec.frequencies[i];
    x.push_back(i + 1 < m ? scale * spec.brackets[i] : 0.0);
    F.push_back(i + 1 < m ? std::min(cum / total, 1.0) : 1.0);
  }

  const double prev = x[m - 1];
  auto gap = [&](double top) {
    std::vector<double> xs = x;
    xs.back() = top;
    return MonotoneCdf(std::move(xs), F).mean() - spec.mean;
  };
  const double lo = prev > 0.0 ? prev * (1.0 + 1e-12) : 1e-12 * spec.mean;
  const double hi = prev > 0.0 ? 1e4 * prev : 1e4 * spec.mean;
  const double g_lo = gap(lo);
  const double g_hi = gap(hi);
  if (!(g_lo <= 0.0 && g_hi >= 0.0))
    throw ConstructionError("fit_stratum_cdf: no top bracket reproduces the stratum mean");
  double top = hi;
  if (g_lo == 0.0) {
    top = lo;
  } else if (g_hi != 0.0) {
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        gap, lo, hi, g_lo, g_hi, boost::math::tools::eps_tolerance<double>(52), iters);
    top = std::abs(gap(a)) <= std::abs(gap(b)) ? a : b;
  }
  x.back() = top;
  MonotoneCdf cdf(x, F);

  std::size_t k = 1;
  while (k < x.size() && x[k] < spec.median) ++k;
  if (k == x.size()) throw ConstructionError("fit_stratum_cdf: median lies above the top bracket");
  const double fitted_median = cdf.quantile(0.5);
  if (fitted_median < x[k - 1] || fitted_median > x[k])
    throw ConstructionError("fit_stratum_cdf: fitted median falls outside the bracket of the reported median");
  return {std::move(cdf), top / scale};
}

SuperpopModel::SuperpopModel(std::vector<double> proportions, std::vector<MonotoneCdf> strata)
    : p_(std::move(proportions)), strata_(std::move(strata)) {
  if (p_.empty() || p_.size() != strata_.size())
    throw DomainError("SuperpopModel: one proportion per stratum required");
  double total = 0.0;
  for (double p : p_) {
    if (!(p >= 0.0)) throw DomainError("SuperpopModel: proportions must be nonnegative");
    total += p;
    cum_p_.push_back(total);
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("SuperpopModel: proportions must sum to one");
}

double SuperpopModel::cdf(double y) const {
  double v = 0.0;
  for (std::size_t h = 0; h < strata_.size(); ++h) v += p_[h] * strata_[h].cdf(y);
  return v;
}

double SuperpopModel::pdf(double y) const {
  double v = 0.0;
  for (std::size_t h = 0; h < strata_.size(); ++h) v += p_[h] * strata_[h].pdf(y);
  return v;
}

double SuperpopModel::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("SuperpopModel::quantile: u must lie in (0, 1)");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& s : strata_) {
    lo = std::min(lo, s.lower());
    hi = std::max(hi, s.upper());
  }
  for (int it = 0; it < 300 && hi - lo > 1e-12 * std::max(std::abs(hi), 1e-300); ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < u ? lo : hi) = mid;
  }
  return hi;
}

std::vector<double> SuperpopModel::breakpoints() const {
  std::vector<double> out;
  for (const auto& s : strata_) out.insert(out.end(), s.knots().begin(), s.knots().end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SuperpopModel::Draw SuperpopModel::sample(RngStream& rng) const {
  const double u = rng.uniform() * cum_p_.back();
  auto h = static_cast<std::size_t>(std::upper_bound(cum_p_.begin(), cum_p_.end(), u) - cum_p_.begin());
  h = std::min(h, strata_.size() - 1);
  return {strata_[h].quantile(rng.uniform()), static_cast<int>(h)};
}

SuperpopModel::Sample SuperpopModel::sample(std::size_t n, RngStream& rng) const {
  Sample out;
  out.y.resize(n);
  out.stratum.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Draw d = sample(rng);
    out.y[i] = d.value;
    out.stratum[i] = d.stratum;
  }
  return out;
}

SuperpopModel mixture(std::vector<double> p, std::vector<MonotoneCdf> cdfs) {
  return SuperpopModel(std::move(p), std::move(cdfs));
}

namespace {

using nlohmann::json;

double number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ConfigError(where + ": missing numeric field '" + key + "'");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + ": field '" + key + "' must be finite");
  return v;
}

std::vector<double> numbers(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw ConfigError(where + ": missing array field '" + key + "'");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ConfigError(where + ": '" + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

SuperpopSpec parse_superpop_spec(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("superpop spec: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("superpop spec: top level must be an object");
  SuperpopSpec spec;
  if (root.contains("label")) spec.label = root.at("label").get<std::string>();
  spec.population_median = number(root, "population_median", "superpop spec");
  if (!(spec.population_median > 0.0))
    throw ConfigError("superpop spec: population_median must be positive");
  if (!root.contains("strata") || !root.at("strata").is_array() || root.at("strata").empty())
    throw ConfigError("superpop spec: 'strata' must be a nonempty array");
  double share = 0.0;
  std::size_t h = 0;
  for (const auto& s : root.at("strata")) {
    const std::string where = "superpop spec: strata[" + std::to_string(h++) + "]";
    if (!s.is_object()) throw ConfigError(where + ": must be an object");
    StratumCdfSpec st;
    st.proportion = number(s, "proportion", where);
    st.median = number(s, "median", where);
    st.mean = number(s, "mean", where);
    st.brackets = numbers(s, "brackets", where);
    st.frequencies = numbers(s, "frequencies", where);
    st.population_median = spec.population_median;
    if (!(st.proportion > 0.0)) throw ConfigError(where + ": proportion must be positive");
    if (!(st.median > 0.0 && st.mean > 0.0)) throw ConfigError(where + ": median and mean must be positive");
    if (st.frequencies.size() != st.brackets.size() + 1)
      throw ConfigError(where + ": need exactly one more frequency than bracket bound");
    double total = 0.0;
    for (double r : st.frequencies) {
      if (!(r >= 0.0)) throw ConfigError(where + ": frequencies must be nonnegative");
      total += r;
    }
    if (std::abs(total - 100.0) > 1e-9) throw ConfigError(where + ": frequencies must sum to 100");
    for (std::size_t i = 0; i < st.brackets.size(); ++i)
      if (!(st.brackets[i] > (i == 0 ? 0.0 : st.brackets[i - 1])))
        throw ConfigError(where + ": brackets must be positive and strictly increasing");
    share += st.proportion;
    spec.strata.push_back(std::move(st));
  }
  if (std::abs(share - 1.0) > 1e-9) throw ConfigError("superpop spec: proportions must sum to 1");
  return spec;
}

SuperpopSpec load_superpop_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open superpopulation spec '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_superpop_spec(buf.str());
}

SuperpopModel build_model(const SuperpopSpec& spec) {
  std::vector<double> p;
  std::vector<MonotoneCdf> cdfs;
  for (const auto& s : spec.strata) {
    p.push_back(s.proportion);
    cdfs.push_back(fit_stratum_cdf(s).cdf);
  }
  return mixture(std::move(p), std::move(cdfs));
}

std::string to_string(SurveyDesign d) {
  switch (d) {
    case SurveyDesign::SurveyOnly: return "survey_only";
    case SurveyDesign::Integrated: return "integrated";
    case SurveyDesign::StratIntegrated: return "strat_integrated";
  }
  return "unknown";
}

ReferenceVariance reference_vprime(const SuperpopModel& model, const TrueFunctionals& truth,
                                   StatisticKind stat, const ReferenceDesign& design,
                                   std::size_t M, RngStream& rng) {
  if (M < 10000) throw DomainError("reference_vprime: need at least 1e4 draws");
  if (!(design.fraction > 0.0 && design.fraction < 1.0))
    throw DomainError("reference_vprime: fraction must lie in (0, 1)");
  if (stat != StatisticKind::Quantile && stat != StatisticKind::Gini && stat != StatisticKind::Mean)
    throw DomainError("reference_vprime: statistic must be the mean, median or Gini index");

  RngStream draw_rng = rng.split("draws");
  const auto pop = model.sample(M, draw_rng);
  const std::vector<double> unit(M, 1.0);

  double theta = 0.0;
  double jac = 0.0;
  std::vector<double> psi(M);
  if (stat == StatisticKind::Quantile) {
    theta = truth.median;
    jac = model.pdf(theta);
    for (std::size_t i = 0; i < M; ++i) psi[i] = psi_quantile(pop.y[i], theta, 0.5);
  } else if (stat == StatisticKind::Mean) {
    theta = truth.mean;
    jac = -1.0;
    for (std::size_t i = 0; i < M; ++i) psi[i] = psi_mean(pop.y[i], theta);
  } else {
    theta = truth.gini;
    jac = -truth.mean;
    const GiniPsiHat g(pop.y, unit);
    for (std::size_t i = 0; i < M; ++i) psi[i] = g(pop.y[i], theta);
  }

  Indicator delta(M, 0);
  if (design.kind != SurveyDesign::SurveyOnly) {
    RngStream big_rng = rng.split("bigdata");
    BigDataMechanism mech{design.threshold, design.low_rate,
                          static_cast<std::size_t>(std::llround(design.bigdata_share * static_cast<double>(M)))};
    delta = bigdata_select(pop.y, mech, big_rng);
  }

  const StratifiedFrame full = StratifiedFrame::from_labels(pop.stratum);
  const StratifiedFrame frame =
      design.kind == SurveyDesign::StratIntegrated ? full.excluding(delta) : full;
  std::size_t eligible = 0;
  for (std::size_t h = 0; h < frame.strata(); ++h) eligible += frame.stratum_size(h);
  const auto n = static_cast<std::size_t>(std::llround(design.fraction * static_cast<double>(M)));
  if (n > eligible) throw DomainError("reference_vprime: survey larger than the eligible population");
  const AllocationPlan plan = neyman_allocate(frame, pop.y, n);

  std::vector<StratumVariance> parts;
  for (std::size_t h = 0; h < frame.strata(); ++h) {
    const auto members = frame.members(h);
    std::vector<double> rows;
    for (std::size_t i : members)
      if (!delta[i] || design.kind == SurveyDesign::SurveyOnly) rows.push_back(psi[i]);
    const Matrix z = Eigen::Map<const Matrix>(rows.data(), static_cast<Eigen::Index>(rows.size()), 1);
    parts.push_back({static_cast<double>(members.size()) / static_cast<double>(M),
                     vprime_srswor(z, members.size(), plan.f[h])});
  }
  if (design.kind == SurveyDesign::StratIntegrated) {
    const auto big = static_cast<double>(std::count(delta.begin(), delta.end(), 1));
    if (big > 0.0) parts.push_back({big / static_cast<double>(M), Matrix::Zero(1, 1)});
  }

  ReferenceVariance out;
  out.v_prime = vprime_stratified(parts);
  double ss = 0.0;
  for (double v : psi) ss += v * v;
  out.v_super = ss / static_cast<double>(M);
  out.jac = jac;
  out.asymptotic = (out.v_prime(0, 0) + out.v_super) / (jac * jac);
  out.draws = M;
  return out;
}

}  // namespace bdsurvey
