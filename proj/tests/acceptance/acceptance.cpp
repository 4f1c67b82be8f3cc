// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: acceptance [criterion ...]   (default: all of 1..9)

#include "cli.hpp"

#include <bdsurvey/design.hpp>
#include <bdsurvey/error.hpp>
#include <bdsurvey/estfun.hpp>
#include <bdsurvey/mc.hpp>
#include <bdsurvey/rng.hpp>
#include <bdsurvey/solve.hpp>
#include <bdsurvey/superpop.hpp>
#include <bdsurvey/variance.hpp>
#include <bdsurvey/weights.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace bdsurvey;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs{BDSURVEY_CONFIG_DIR};

// Collects failed checks for one criterion.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (!ok && failures_.size() < 8) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void close(double got, double want, const std::string& what, double rel = 1e-10) {
    const double tol = rel * std::max(1.0, std::abs(want));
    std::ostringstream s;
    s.precision(17);
    s << what << ": got " << got << ", want " << want;
    expect(std::abs(got - want) <= tol, s.str());
  }
  void near(double got, double want, double abs_tol, const std::string& what) {
    std::ostringstream s;
    s << what << ": got " << got << ", want " << want << " +- " << abs_tol;
    expect(std::abs(got - want) <= abs_tol, s.str());
  }
  template <class E, class F>
  void throws(F&& f, const std::string& what) {
    bool ok = false;
    try {
      f();
    } catch (const E&) {
      ok = true;
    } catch (...) {
    }
    expect(ok, what + ": expected exception");
  }
  void note(const std::string& s) { notes_.push_back(s); }

  bool ok() const { return failed_ == 0; }
  std::string detail() const {
    std::ostringstream s;
    s << (total_ - failed_) << "/" << total_ << " checks";
    for (const auto& n : notes_) s << "; " << n;
    for (const auto& f : failures_) s << "\n    failed: " << f;
    return s.str();
  }

 private:
  std::size_t total_ = 0, failed_ = 0;
  std::vector<std::string> failures_, notes_;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Population scalar_population(const std::vector<double>& y) {
  Population pop;
  for (double v : y) pop.push_back(Observation::scalar(v));
  return pop;
}

Observation regression_unit(double y, std::initializer_list<double> x) {
  Observation o;
  o.y = Vector(static_cast<Eigen::Index>(x.size() + 1));
  o.y(0) = y;
  Eigen::Index i = 1;
  for (double v : x) o.y(i++) = v;
  return o;
}

Matrix col(std::initializer_list<double> v) { return Matrix(vec(v)); }

std::vector<Indicator> all_samples(std::size_t N, std::size_t n) {
  std::vector<Indicator> out;
  Indicator mask(N, 0);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(n), 1);
  do out.push_back(mask);
  while (std::prev_permutation(mask.begin(), mask.end()));
  return out;
}

double variance(const std::vector<double>& x) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

// Standard error of a sample variance from the fourth central moment.
double variance_se(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    m2 += d / n;
    m4 += d * d / n;
  }
  return std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---- 1 ---------------------------------------------------------------------

void criterion1(Checker& c) {
  c.close(psi_mean(5, 5), 0, "psi_mean(5,5)");
  c.close(psi_mean(3, 1), 2, "psi_mean(3,1)");
  c.close(psi_mean(-2.5, 0), -2.5, "psi_mean(-2.5,0)");
  c.close(psi_quantile(1, 2, 0.5), 0.5, "psi_quantile(1,2,.5)");
  c.close(psi_quantile(3, 2, 0.5), -0.5, "psi_quantile(3,2,.5)");
  c.close(psi_quantile(2, 2, 0.9), 0, "psi_quantile tie");
  c.throws<DomainError>([] { psi_quantile(1, 2, 1.5); }, "psi_quantile p=1.5");

  {
    // Gini psi-hat: oracle is the defining sum evaluated directly.
    const std::vector<double> y{0, 1}, w{1, 1};
    const GiniPsiHat g(y, w);
    const double N = 2.0;
    auto Fhat = [&](double t) { return ((y[0] <= t) + (y[1] <= t)) / N; };
    const double mxf = (Fhat(0) * 0 + Fhat(1) * 1) / N;
    const double upper = ((0 <= y[0]) * y[0] + (0 <= y[1]) * y[1]) / N;
    const double direct = 2 * (upper - mxf) + (2 * Fhat(0) - 1) * 0 - 0.5 * 0;
    c.close(g(0.0, 0.5), direct, "gini psi-hat on {0,1}");
    const std::vector<double> cc{3.5, 3.5};
    c.close(GiniPsiHat(cc, w)(3.5, 0.0), 3.5, "gini psi-hat on {c,c}");
    c.close(g(1.0, 0.5) - g(1.0, 1.5), 1.0, "gini psi-hat theta shift");
  }

  c.close(psi_linreg(2, Eigen::RowVectorXd::Constant(1, 1), vec({2}))(0), 0, "linreg (2,[1],[2])");
  {
    Eigen::RowVectorXd x(2);
    x << 1, 2;
    const Vector r = psi_linreg(3, x, vec({1, 1}));
    c.close(r(0), 0, "linreg exact fit [0]");
    c.close(r(1), 0, "linreg exact fit [1]");
  }
  c.close(psi_linreg(1, Eigen::RowVectorXd::Constant(1, 2), vec({0}))(0), 2, "linreg (1,[2],[0])");

  const auto bernoulli = psi_mle(
      [](const Vector& y, const Vector& t) {
        return Vector::Constant(1, y(0) / t(0) - (1 - y(0)) / (1 - t(0)));
      },
      1);
  c.close(bernoulli.psi(vec({1}), vec({0.5}))(0), 2, "bernoulli score (1,.5)");
  c.close(bernoulli.psi(vec({0}), vec({0.5}))(0), -2, "bernoulli score (0,.5)");
  const auto normal_mean = psi_mle([](const Vector& y, const Vector& t) { return Vector(y - t); }, 1);
  c.close(normal_mean.psi(vec({0}), vec({0}))(0), 0, "normal-mean score");

  {
    const auto pop = scalar_population({1, 3});
    const auto ef = EstimatingFunction::mean();
    c.close(eval_psi_s(ef, pop, std::vector<double>{1, 1}, vec({2})).value(0), 0, "Psi_s w=1");
    const auto v = eval_psi_s(ef, pop, std::vector<double>{2, 0}, vec({1}));
    c.close(v.value(0), 0, "Psi_s w=(2,0)");
    c.expect(v.n_terms == 1, "Psi_s n_terms");
    c.close(eval_psi_s(ef, pop, std::vector<double>{1, 1}, vec({0.5})).value(0), 1.5,
            "Psi_s w=1 equals population average");
  }

  {
    const MembershipRealization m({1, 0, 1}, {0.25, 0.25, 1.0});
    const auto w = horvitz_thompson(m);
    c.close(w[0], 4, "HT alpha=1 pi=.25");
    c.close(w[1], 0, "HT alpha=0");
    c.close(w[2], 1, "HT census unit");
    const WeightVector base({0, 4, 0}, WeightScheme::HorvitzThompson, true);
    const auto di = integrate(Indicator{1, 0, 0}, base);
    c.expect(di[0] == 1 && di[1] == 4 && di[2] == 0, "integrate (1,0,0) x (0,4,0)");
    const auto n1 = normalize(WeightVector({0, 4}, WeightScheme::Custom, false));
    c.expect(n1[0] == 0 && n1[1] == 2, "normalize (0,4)");
    const auto n2 = normalize(WeightVector({2, 2}, WeightScheme::Custom, false));
    c.expect(n2[0] == 1 && n2[1] == 1, "normalize (2,2)");
  }

  const std::vector<double> ones3{1, 1, 1};
  c.close(weighted_quantile(std::vector<double>{1, 2, 3}, ones3, 0.5).scalar(), 2, "quantile (1,2,3)");
  c.close(weighted_quantile(std::vector<double>{5}, std::vector<double>{1}, 0.3).scalar(), 5,
          "quantile single");
  c.close(weighted_quantile(std::vector<double>{1, 2, 3, 4}, std::vector<double>{2, 1, 0, 1}, 0.5)
              .scalar(),
          1, "quantile weighted");
  c.close(gini(std::vector<double>{4, 4, 4}, ones3).scalar(), 0, "gini constant");
  c.close(gini(std::vector<double>{0, 1}, std::vector<double>{1, 1}).scalar(), 0.5, "gini (0,1)");
  c.close(gini(std::vector<double>{1, 2, 3}, ones3).scalar(), 2.0 / 9.0, "gini (1,2,3)");

  {
    const Population exact{regression_unit(2, {1}), regression_unit(4, {2}), regression_unit(6, {3})};
    c.close(wls(exact, ones3).scalar(), 2, "wls exact fit");
    const Population p{regression_unit(1, {1}), regression_unit(2, {2}), regression_unit(2, {3})};
    c.close(wls(p, ones3).scalar(), 11.0 / 14.0, "wls 11/14");
    c.close(wls(p, std::vector<double>{10, 10, 10}).scalar(), 11.0 / 14.0, "wls scaled weights");
    c.throws<RankDeficiencyError>(
        [] {
          const Population z{regression_unit(1, {0}), regression_unit(2, {0})};
          wls(z, std::vector<double>{1, 1});
        },
        "wls singular");
  }
  {
    const auto pop = scalar_population({1, 1, 0});
    const auto r = newton_solve(bernoulli, pop, ones3, vec({0.5}));
    c.close(r.scalar(), 2.0 / 3.0, "newton bernoulli", 1e-9);
    c.close(newton_solve(bernoulli, pop, std::vector<double>{2, 0, 1}, vec({0.5})).scalar(),
            2.0 / 3.0, "newton bernoulli weighted", 1e-9);
    c.close(newton_solve(normal_mean, scalar_population({1, 3}), std::vector<double>{1, 1}, vec({0}))
                .scalar(),
            2, "newton normal mean", 1e-9);
  }

  {
    const std::vector<double> y{1, 2, 3};
    c.close(jacobian_avg(EstimatingFunction::gini(y, ones3), y, ones3, 0.3), -2, "jacobian gini");
    c.close(jacobian_avg(EstimatingFunction::mean(), y, ones3, 7.0), -1, "jacobian mean");
    const Population one{regression_unit(0, {1, 2})};
    const Matrix j = jacobian_avg(EstimatingFunction::linreg(2), one, std::vector<double>{1},
                                  vec({0, 0}));
    c.close(j(0, 0), -1, "jacobian linreg 00");
    c.close(j(0, 1), -2, "jacobian linreg 01");
    c.close(j(1, 1), -4, "jacobian linreg 11");
    c.throws<UnsupportedStrategyError>(
        [&] {
          jacobian_avg(EstimatingFunction::quantile(0.5), scalar_population(y), ones3, vec({2}));
        },
        "jacobian quantile");
  }
  {
    auto rng = RngStream::derive(1, 0, "acceptance-kde");
    std::vector<double> z(100000), u(100000), w(100000, 1.0);
    for (auto& v : z) v = rng.normal();
    for (auto& v : u) v = rng.uniform();
    c.near(density_jacobian(z, w, 0.0)(0, 0), 0.3989, 0.01, "kde normal");
    c.near(density_jacobian(u, w, 0.5)(0, 0), 1.0, 0.05, "kde uniform");
    c.throws<DomainError>(
        [] { DensityEstimate(std::vector<double>{2, 2}, std::vector<double>{1, 1}); },
        "kde two equal points");
  }

  {
    const auto ef = EstimatingFunction::mean();
    const auto pop = scalar_population({1, -1, 7, 9});
    const auto m = MembershipRealization::srswor({1, 1, 0, 0});
    c.close(vprime_ht(ef, pop, m, vec({0}))(0, 0), 2, "vprime_ht N=4");
    const MembershipRealization census({1, 1, 1, 1}, {1, 1, 1, 1},
                                       [](std::size_t, std::size_t) { return 1.0; });
    c.expect(vprime_ht(ef, pop, census, vec({0})).isZero(0), "vprime_ht census");
    c.expect(vprime_ht(ef, pop, m, vec({0}), Indicator{1, 1, 0, 0}).isZero(0), "vprime_ht B=A");
  }
  c.expect(vprime_srswor(col({2, 4}), 2, 1.0).isZero(0), "vprime_srswor f=1");
  c.close(vprime_srswor(col({2, 4}), 2, 0.5)(0, 0), 2, "vprime_srswor (2,4)");
  c.expect(vprime_srswor(col({3, 3, 3}), 3, 0.2).isZero(0), "vprime_srswor equal");
  {
    const std::vector<StratumVariance> one{{1.0, Matrix::Constant(1, 1, 5)}};
    c.close(vprime_stratified(one)(0, 0), 5, "stratified single");
    const std::vector<StratumVariance> two{{0.5, Matrix::Constant(1, 1, 2)},
                                           {0.5, Matrix::Constant(1, 1, 4)}};
    c.close(vprime_stratified(two)(0, 0), 3, "stratified (2,4)");
    const std::vector<StratumVariance> zero{{0.3, Matrix::Constant(1, 1, 0)},
                                            {0.7, Matrix::Constant(1, 1, 4)}};
    c.close(vprime_stratified(zero)(0, 0), 2.8, "stratified zero stratum");
    const std::vector<StratumSample> census{{col({1, 2}), 2, 2}, {col({5, 7, 9}), 3, 3}};
    c.expect(vprime_stratified_srswor(census).isZero(0), "stratified srswor census");
    const std::vector<StratumSample> single{{col({2, 4}), 2, 4}};
    c.close(vprime_stratified_srswor(single)(0, 0), 2, "stratified srswor single");
    const std::vector<StratumSample> pair{{col({2, 4}), 2, 4}, {col({2, 4}), 2, 4}};
    c.close(vprime_stratified_srswor(pair)(0, 0), 2, "stratified srswor pair");
  }
  {
    const auto ef = EstimatingFunction::mean();
    const std::vector<double> y{1, -1}, w{1, 1}, w2{2, 2};
    c.close(v_super_iid(ef, y, w, 0.0), 1, "v_super (1,-1)");
    c.close(v_super_iid(ef, std::vector<double>{3, 3}, w, 3.0), 0, "v_super zero");
    c.close(v_super_iid(ef, y, w2, 0.0), 2, "v_super doubled weights");
    auto r = assemble(Matrix::Constant(1, 1, -2), Matrix::Constant(1, 1, 8), std::nullopt, 100);
    c.close(r.design_var(0, 0), 0.02, "assemble 0.02");
    r = assemble(Matrix::Constant(1, 1, -2), Matrix::Constant(1, 1, 8), Matrix::Zero(1, 1), 100);
    c.close(r.joint_var->coeff(0, 0), r.design_var(0, 0), "assemble joint = design");
    Matrix V(2, 2);
    V << 2, 1, 1, 3;
    r = assemble(Matrix::Identity(2, 2), V, std::nullopt, 10);
    c.expect((r.design_var - V / 10.0).norm() <= 1e-15, "assemble identity");
  }
  c.note("Gini psi-hat on {0,1} at y=0 checked against the defining sums");
}

// ---- 2 ---------------------------------------------------------------------

void criterion2(Checker& c) {
  const std::vector<double> y{1.5, -2.0, 4.0, 0.5, 7.25, 3.0};
  const std::size_t N = y.size(), n = 3;
  const double f = static_cast<double>(n) / N;
  const auto pop = scalar_population(y);
  const auto ef = EstimatingFunction::mean();
  const double theta = 1.25;
  const double psi_N = eval_psi_s(ef, pop, std::vector<double>(N, 1.0), vec({theta})).value(0);
  const auto samples = all_samples(N, n);
  c.expect(samples.size() == 20, "20 samples");

  for (const Indicator& delta : {Indicator(N, 0), Indicator{1, 0, 0, 1, 0, 0}}) {
    const bool integrated = delta[0] == 1;
    const std::string tag = integrated ? " (DI)" : " (HT)";
    std::vector<double> mean_w(N, 0.0);
    std::vector<double> psi_s, vprime;
    for (const auto& a : samples) {
      WeightVector w = horvitz_thompson(MembershipRealization::srswor(a));
      if (integrated) w = integrate(delta, w);
      for (std::size_t i = 0; i < N; ++i) mean_w[i] += w[i] / samples.size();
      psi_s.push_back(eval_psi_s(ef, pop, w.values(), vec({theta})).value(0));
      std::vector<double> rows;
      for (std::size_t i = 0; i < N; ++i)
        if (a[i] && !delta[i]) rows.push_back(y[i] - theta);
      Matrix m(static_cast<Eigen::Index>(rows.size()), 1);
      for (std::size_t r = 0; r < rows.size(); ++r) m(static_cast<Eigen::Index>(r), 0) = rows[r];
      vprime.push_back(vprime_srswor(m, n, f)(0, 0));
    }
    for (std::size_t i = 0; i < N; ++i) c.close(mean_w[i], 1.0, "mean weight unit " + std::to_string(i) + tag);
    const double e_psi = std::accumulate(psi_s.begin(), psi_s.end(), 0.0) / samples.size();
    c.close(e_psi, psi_N, "E Psi_s = Psi_N" + tag);
    double exact = 0.0;
    for (double v : psi_s) exact += N * (v - e_psi) * (v - e_psi) / samples.size();
    const double e_vprime = std::accumulate(vprime.begin(), vprime.end(), 0.0) / samples.size();
    c.close(e_vprime, exact, "E vprime_srswor = Var(sqrt(N) Psi_s)" + tag);
  }
}

// ---- 3 ---------------------------------------------------------------------

void criterion3(Checker& c) {
  auto rng = RngStream::derive(2024, 3, "acceptance-normalization");
  const auto bernoulli = psi_mle(
      [](const Vector& y, const Vector& t) {
        return Vector::Constant(1, y(0) / t(0) - (1 - y(0)) / (1 - t(0)));
      },
      1);
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t N = 20 + rng.below(60);
    std::vector<double> w(N);
    for (auto& v : w) v = rng.uniform() < 0.3 ? 0.0 : 0.1 + 5.0 * rng.uniform();
    w[0] = 1.0;
    w[1] = 2.0;
    const WeightVector wv(w, WeightScheme::Custom, false);
    const auto wn = normalize(wv);

    Population reg;
    for (std::size_t i = 0; i < N; ++i) {
      const double x1 = rng.normal(), x2 = rng.normal();
      reg.push_back(regression_unit(1.0 + 2.0 * x1 - x2 + rng.normal(), {1.0, x1, x2}));
    }
    const Vector a = wls(reg, wv.values()).theta, b = wls(reg, wn.values()).theta;
    const double d_wls = (a - b).norm() / std::max(1.0, a.norm());
    c.expect(d_wls <= 1e-10, "wls invariance instance " + std::to_string(inst));

    Population bern;
    for (std::size_t i = 0; i < N; ++i) bern.push_back(Observation::scalar(rng.uniform() < 0.4 ? 1 : 0));
    bern[0] = Observation::scalar(1);
    bern[1] = Observation::scalar(0);
    const auto ra = newton_solve(bernoulli, bern, wv.values(), vec({0.5}));
    const auto rb = newton_solve(bernoulli, bern, wn.values(), vec({0.5}));
    c.expect(ra.converged && rb.converged, "newton converged instance " + std::to_string(inst));
    const double d_mle = std::abs(ra.scalar() - rb.scalar());
    c.expect(d_mle <= 1e-9, "mle invariance instance " + std::to_string(inst));

    std::vector<double> y(N), ws(N);
    for (auto& v : y) v = std::exp(rng.normal());
    const double scale = std::exp(4.0 * rng.normal());
    for (std::size_t i = 0; i < N; ++i) ws[i] = scale * w[i];
    const double p = 0.05 + 0.9 * rng.uniform();
    c.expect(weighted_quantile(y, w, p).scalar() == weighted_quantile(y, ws, p).scalar(),
             "quantile scaling instance " + std::to_string(inst));
    const double g = gini(y, w).scalar(), gs = gini(y, ws).scalar();
    c.expect(std::abs(g - gs) <= 1e-12 * std::max(1.0, g), "gini scaling instance " + std::to_string(inst));
    worst = std::max({worst, d_wls, d_mle, std::abs(g - gs)});
  }
  c.note("max discrepancy " + fmt(worst));
}

// ---- 4 ---------------------------------------------------------------------

void criterion4(Checker& c) {
  auto rng = RngStream::derive(2024, 4, "acceptance-bracketing");
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t N = 5 + rng.below(200);
    std::vector<double> y(N), w(N);
    for (auto& v : y) v = rng.normal() * 3.0 + 1.0;
    for (auto& v : w) v = rng.uniform() < 0.4 ? 0.0 : rng.exponential();
    w[0] = 1.0;
    const auto wn = normalize(WeightVector(w, WeightScheme::Custom, false));
    const double p = 0.01 + 0.98 * rng.uniform();
    const double t = weighted_quantile(y, wn.values(), p).scalar();
    double sum = 0.0, wj = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      if (wn[i] == 0.0) continue;
      sum += wn[i] * psi_quantile(y[i], t, p);
      if (y[i] == t) wj += wn[i];
    }
    const double slack = 1e-12 * static_cast<double>(N);
    c.expect(wj > 0.0, "returned value is an observed unit, instance " + std::to_string(inst));
    c.expect(-(1 - p) * wj - slack <= sum && sum <= p * wj + slack,
             "bracketing instance " + std::to_string(inst));
  }
}

// ---- 5 ---------------------------------------------------------------------

void criterion5(Checker& c) {
  const std::size_t N = 2000, reps = 2000;
  const double f = 0.1;
  const std::size_t n = static_cast<std::size_t>(std::llround(f * N));
  const auto ef = EstimatingFunction::mean();
  std::vector<double> theta_s(reps), theta_N(reps), dv(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    auto rng = RngStream::derive(5005, r, "acceptance-joint");
    auto pop_rng = rng.split("population");
    auto design_rng = rng.split("design");
    std::vector<double> y(N);
    for (auto& v : y) v = 10.0 + 2.0 * pop_rng.normal();
    theta_N[r] = std::accumulate(y.begin(), y.end(), 0.0) / N;
    const auto idx = srswor(N, n, design_rng);
    Indicator a(N, 0);
    for (auto i : idx) a[i] = 1;
    const auto w = horvitz_thompson(MembershipRealization::srswor(a));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      num += w[i] * y[i];
      den += w[i];
    }
    theta_s[r] = num / den;
    Matrix psi(static_cast<Eigen::Index>(n), 1);
    for (std::size_t k = 0; k < n; ++k) psi(static_cast<Eigen::Index>(k), 0) = y[idx[k]] - theta_s[r];
    const double jac = jacobian_avg(ef, y, w.values(), theta_s[r]);
    dv[r] = assemble(Matrix::Constant(1, 1, jac), vprime_srswor(psi, n, f), std::nullopt, N)
                .design_var(0, 0);
  }
  const double ms = std::accumulate(theta_s.begin(), theta_s.end(), 0.0) / reps;
  const double mN = std::accumulate(theta_N.begin(), theta_N.end(), 0.0) / reps;
  std::vector<double> z(reps);
  for (std::size_t r = 0; r < reps; ++r)
    z[r] = (theta_s[r] - ms) * (theta_s[r] - ms) - dv[r] - (theta_N[r] - mN) * (theta_N[r] - mN);
  const double lhs = variance(theta_s);
  const double rhs = std::accumulate(dv.begin(), dv.end(), 0.0) / reps + variance(theta_N);
  const double se = std::sqrt(variance(z) / reps);
  c.expect(std::abs(lhs - rhs) <= 3 * se, "Var(theta_s) vs mean(design_var) + Var(theta_N)");
  c.note("Var(theta_s) " + fmt(lhs) + ", decomposition " + fmt(rhs) + ", z " + fmt((lhs - rhs) / se));
}

// ---- 6 ---------------------------------------------------------------------

void criterion6(Checker& c) {
  const std::size_t N = 10000, reps = 5000;
  const double F2 = 0.8, f = 0.1;
  const std::size_t n = static_cast<std::size_t>(std::llround(f * N));
  auto rng = RngStream::derive(6006, 0, "acceptance-enumerated");
  std::vector<double> y(N);
  for (auto& v : y) v = 50.0 + 10.0 * rng.normal();
  // Big-data set B: a fixed 20% of the population, the completely enumerated stratum.
  const auto b_idx = srswor(N, static_cast<std::size_t>(std::llround((1 - F2) * N)), rng);
  Indicator in_b(N, 0);
  for (auto i : b_idx) in_b[i] = 1;
  const auto frame = StratifiedFrame::single(N);

  auto weighted_mean = [&](const WeightVector& w) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      num += w[i] * y[i];
      den += w[i];
    }
    return num / den;
  };

  std::vector<double> full(reps), enumerated(reps);
  AllocationPlan plan;
  plan.n = {n};
  plan.f = {f / F2};
  for (std::size_t r = 0; r < reps; ++r) {
    auto rep = RngStream::derive(6006, r + 1, "acceptance-enumerated");
    auto r_full = rep.split("full");
    auto r_enum = rep.split("enumerated");
    const auto idx = srswor(N, n, r_full);
    Indicator a(N, 0);
    for (auto i : idx) a[i] = 1;
    full[r] = weighted_mean(horvitz_thompson(MembershipRealization::srswor(a)));
    const auto s = stratified_srswor(frame, plan, r_enum, in_b);
    enumerated[r] = weighted_mean(integrate(in_b, horvitz_thompson(s.membership)));
  }
  const double vf = variance(full), ve = variance(enumerated);
  const double ratio = ve / vf;
  const double rel_se = std::hypot(variance_se(full) / vf, variance_se(enumerated) / ve);
  const double se = ratio * rel_se;
  const double target = enumerated_stratum_ratio(F2, f);
  c.expect(std::abs(ratio - target) <= 3 * se, "variance ratio vs (F2^2 - f)/(1 - f)");
  c.note("ratio " + fmt(ratio) + " +- " + fmt(se) + ", target " + fmt(target) + ", z " +
         fmt((ratio - target) / se));
}

// ---- 7 ---------------------------------------------------------------------

void criterion7(Checker& c) {
  const auto cfg = load_study_config(kConfigs / "study_desk.json");
  const Study study(cfg);
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  const auto out = study.run(workers);
  const auto& s = out.summary;
  const std::size_t largest = cfg.population_sizes.back();
  double worst_ratio = 0.0, worst_z = 0.0;
  auto asymptote = [&](Statistic st, Estimator e) -> const AsymptoticLine* {
    for (const auto& a : s.asymptotic)
      if (a.stat == st && a.estimator == e) return &a;
    return nullptr;
  };
  for (const std::size_t N : cfg.population_sizes) {
    const std::string at = " at N=" + std::to_string(N);
    const auto* bm = s.find(N, Statistic::Median, Estimator::BigData);
    const auto* bg = s.find(N, Statistic::Gini, Estimator::BigData);
    c.expect(bm && bm->available && bm->bias > 0 && bm->bias_lo > 0, "(a) big-data median bias > 0" + at);
    c.expect(bg && bg->available && bg->bias < 0 && bg->bias_hi < 0, "(a) big-data Gini bias < 0" + at);
    for (const Statistic st : {Statistic::Median, Statistic::Gini}) {
      const std::string tag = " " + to_string(st) + at;
      const auto* so = s.find(N, st, Estimator::SurveyOnly);
      const auto* in = s.find(N, st, Estimator::Integrated);
      const auto* si = s.find(N, st, Estimator::StratIntegrated);
      if (!(so && in && si && so->available && in->available && si->available)) {
        c.expect(false, "cells available" + tag);
        continue;
      }
      if (N == largest) {
        c.expect(in->bias_lo <= 0 && 0 <= in->bias_hi, "(b) integrated bias CI contains 0" + tag);
        c.expect(si->bias_lo <= 0 && 0 <= si->bias_hi, "(b) strat-integrated bias CI contains 0" + tag);
      }
      c.expect(si->variance < in->variance && in->variance < so->variance, "(c) variance ordering" + tag);
      const double ratio = si->variance / in->variance;
      worst_ratio = std::max(worst_ratio, ratio);
      c.expect(ratio < 0.7, "(c) strat-integrated/integrated < 0.7" + tag);
      for (const auto* cell : {in, si}) {
        const auto* a = asymptote(st, cell->estimator);
        if (!a) {
          c.expect(false, "(d) asymptotic line present" + tag);
          continue;
        }
        const double se = (cell->variance_hi - cell->variance_lo) / (2 * 1.959963984540054);
        const double z = (cell->variance - a->value) / se;
        worst_z = std::max(worst_z, std::abs(z));
        c.expect(std::abs(z) <= 4, "(d) " + to_string(cell->estimator) + " within 4 SE of asymptote" + tag);
      }
    }
  }
  c.note("max strat/integrated ratio " + fmt(worst_ratio) + ", max |z| vs asymptote " + fmt(worst_z));
}

// ---- 8 ---------------------------------------------------------------------

struct Exponential {
  double cdf(double y) const { return y <= 0 ? 0.0 : -std::expm1(-y); }
  std::vector<double> breakpoints() const { return {0.0, std::numeric_limits<double>::infinity()}; }
};

void criterion8(Checker& c) {
  const auto u = true_functionals(MonotoneCdf({0.0, 1.0}, {0.0, 1.0}));
  c.close(u.gini, 1.0 / 3.0, "uniform Gini", 1e-6);
  c.close(true_functionals(Exponential{}).gini, 0.5, "exponential Gini", 1e-6);
  for (const char* name : {"superpop_desk.json", "superpop_synthetic12.json"}) {
    const auto spec = load_superpop_spec(kConfigs / name);
    for (std::size_t h = 0; h < spec.strata.size(); ++h) {
      const auto& st = spec.strata[h];
      const std::string tag = std::string(name) + " stratum " + std::to_string(h);
      const auto fit = fit_stratum_cdf(st);
      const auto& F = fit.cdf;
      // Independent mean: trapezoid rule on the survival function.
      const std::size_t steps = 2000000;
      const double hi = F.upper(), dx = hi / steps;
      double acc = 0.5 * (1.0 - F.cdf(0.0)) + 0.5 * (1.0 - F.cdf(hi));
      for (std::size_t i = 1; i < steps; ++i) acc += 1.0 - F.cdf(dx * static_cast<double>(i));
      c.close(acc * dx, st.mean, "mean constraint " + tag, 1e-6);
      const auto knots = F.knots();
      const auto values = F.values();
      for (std::size_t i = 0; i < knots.size(); ++i)
        c.expect(F.cdf(knots[i]) == values[i], "knot " + std::to_string(i) + " " + tag);
      const double scale = 52.0 * st.median / st.population_median;
      double cum = 0.0;
      for (std::size_t i = 0; i < st.brackets.size(); ++i) {
        cum += st.frequencies[i] / 100.0;
        c.close(knots[i + 1], scale * st.brackets[i], "knot location " + std::to_string(i) + " " + tag, 1e-15);
        c.close(values[i + 1], cum, "knot value " + std::to_string(i) + " " + tag, 1e-12);
      }
    }
  }
}

// ---- 9 ---------------------------------------------------------------------

void criterion9(Checker& c) {
  const fs::path dir = fs::temp_directory_path() / "bdsurvey_acceptance_determinism";
  fs::remove_all(dir);
  const std::string cfg = (kConfigs / "study_smoke.json").string();
  std::ostringstream sink;
  for (const char* workers : {"1", "8"}) {
    const int code = cli::run({"simulate", "--config", cfg, "--out", (dir / workers).string(),
                               "--workers", workers},
                              sink, sink);
    c.expect(code == 0, std::string("simulate --workers ") + workers + " exit code");
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "1")) {
    if (entry.path().extension() != ".csv") continue;
    const auto other = dir / "8" / entry.path().filename();
    c.expect(fs::exists(other) && slurp(entry.path()) == slurp(other),
             entry.path().filename().string() + " byte-identical");
    ++compared;
  }
  c.expect(compared == 5, "five CSV files compared");
  c.note(std::to_string(compared) + " CSV files compared");
  fs::remove_all(dir);
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Checker&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "exact-oracle examples", criterion1},
      {2, "brute-force design unbiasedness", criterion2},
      {3, "normalization invariance", criterion3},
      {4, "quantile bracketing", criterion4},
      {5, "joint-variance decomposition", criterion5},
      {6, "enumerated-stratum efficiency", criterion6},
      {7, "desk-scale replication", criterion7},
      {8, "superpopulation functionals", criterion8},
      {9, "determinism across worker counts", criterion9},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  bool all_ok = true;
  for (const auto& cr : criteria) {
    if (!selected.empty() && !selected.count(cr.id)) continue;
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all_ok = all_ok && c.ok();
    std::cout << (c.ok() ? "PASS" : "FAIL") << " criterion " << cr.id << " (" << cr.name << ", "
              << fmt(secs) << " s): " << c.detail() << std::endl;
  }
  return all_ok ? 0 : 1;
}
