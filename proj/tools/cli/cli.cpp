#include "cli.hpp"

#include "data_csv.hpp"

#include <bdsurvey/design.hpp>
#include <bdsurvey/error.hpp>
#include <bdsurvey/mc.hpp>
#include <bdsurvey/solve.hpp>
#include <bdsurvey/superpop.hpp>
#include <bdsurvey/variance.hpp>
#include <bdsurvey/weights.hpp>

#include "CLI11.hpp"
#include "json.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#ifndef BDSURVEY_VERSION
#define BDSURVEY_VERSION "unknown"
#endif

namespace bdsurvey::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open '" + p.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) throw IoError("cannot write '" + p.string() + "'");
}

ordered_json matrix_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---- estimation -------------------------------------------------------------

struct StatisticChoice {
  StatisticKind kind = StatisticKind::Mean;
  double p = 0.5;
  std::string name;
};

StatisticChoice parse_statistic_choice(const std::string& name, double p) {
  if (name == "mean") return {StatisticKind::Mean, p, name};
  if (name == "median") return {StatisticKind::Quantile, 0.5, name};
  if (name == "quantile") {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("--p must lie in (0, 1)");
    return {StatisticKind::Quantile, p, name};
  }
  if (name == "gini") return {StatisticKind::Gini, p, name};
  if (name == "linreg") return {StatisticKind::LinearRegression, p, name};
  throw ConfigError("unknown statistic '" + name + "' (mean, median, quantile, gini, linreg)");
}

WeightVector build_weights(const DataTable& t, const std::string& scheme) {
  const std::size_t N = t.rows();
  auto need = [&](bool present, const char* col) {
    if (!present)
      throw ConfigError("weights '" + scheme + "' require a '" + std::string(col) + "' column");
  };
  if (scheme == "unit") return WeightVector::unit(N);
  if (scheme == "bigdata") {
    need(t.delta.has_value(), "delta");
    return WeightVector::big_data_only(*t.delta);
  }
  if (scheme == "ht" || scheme == "di") {
    need(t.alpha.has_value(), "alpha");
    need(t.pi.has_value(), "pi");
    if (scheme == "di") need(t.delta.has_value(), "delta");
    const WeightVector ht = horvitz_thompson(MembershipRealization(*t.alpha, *t.pi));
    return scheme == "ht" ? ht : integrate(*t.delta, ht);
  }
  throw ConfigError("unknown weights '" + scheme + "' (unit, ht, di, bigdata)");
}

struct EstimateReport {
  StatisticChoice stat;
  std::string weights;
  std::size_t N = 0;
  std::size_t n_used = 0;
  Vector theta;
  std::optional<VarianceReport> variance;
  std::string note;
};

// Stratified SRSWOR design read from the alpha/stratum columns. Returns nullopt
// when pi disagrees with n_h / N_h, since pi_ij is then unknown.
std::optional<std::vector<StratumDesign>> srswor_strata(const DataTable& t) {
  const StratifiedFrame frame = StratifiedFrame::from_labels(t.strata());
  std::vector<StratumDesign> out;
  for (std::size_t h = 0; h < frame.strata(); ++h) {
    StratumDesign d;
    d.N = frame.stratum_size(h);
    for (std::size_t i : frame.members(h))
      if ((*t.alpha)[i]) d.sampled.push_back(i);
    const double f = static_cast<double>(d.sampled.size()) / static_cast<double>(d.N);
    for (std::size_t i : frame.members(h))
      if (std::abs((*t.pi)[i] - f) > 1e-9) return std::nullopt;
    out.push_back(std::move(d));
  }
  return out;
}

EstimateReport estimate(const DataTable& t, const StatisticChoice& stat, const std::string& scheme) {
  EstimateReport r;
  r.stat = stat;
  r.weights = scheme;
  r.N = t.rows();
  const WeightVector w = normalize(build_weights(t, scheme));
  const auto wv = w.values();
  r.n_used = w.sample_size();
  const std::size_t N = r.N;

  std::function<Vector(std::size_t)> psi;
  Matrix jac;
  std::optional<GiniPsiHat> gini_psi;
  const Population pop = t.observations();
  std::optional<EstimatingFunction> ef;

  switch (stat.kind) {
    case StatisticKind::Mean: {
      double s = 0.0;
      for (std::size_t i = 0; i < N; ++i) s += wv[i] * t.y[i];
      r.theta = Vector::Constant(1, s / static_cast<double>(N));
      break;
    }
    case StatisticKind::Quantile:
      r.theta = weighted_quantile(t.y, wv, stat.p).theta;
      break;
    case StatisticKind::Gini:
      r.theta = gini(t.y, wv).theta;
      break;
    case StatisticKind::LinearRegression:
      if (t.x.empty()) throw ConfigError("linreg needs at least one regressor column x1");
      r.theta = wls(pop, wv).theta;
      break;
    default:
      throw ConfigError("unsupported statistic");
  }

  const double theta0 = r.theta(0);
  try {
    switch (stat.kind) {
      case StatisticKind::Mean:
        psi = [&](std::size_t i) { return Vector::Constant(1, psi_mean(t.y[i], theta0)); };
        jac = Matrix::Constant(1, 1, -1.0);
        break;
      case StatisticKind::Quantile:
        psi = [&](std::size_t i) { return Vector::Constant(1, psi_quantile(t.y[i], theta0, stat.p)); };
        jac = density_jacobian(t.y, wv, theta0);
        break;
      case StatisticKind::Gini: {
        gini_psi.emplace(t.y, wv);
        psi = [&](std::size_t i) { return Vector::Constant(1, (*gini_psi)(t.y[i], theta0)); };
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) s += wv[i] * t.y[i];
        jac = Matrix::Constant(1, 1, -s / static_cast<double>(N));
        break;
      }
      default:
        ef.emplace(EstimatingFunction::linreg(static_cast<int>(t.x.size())));
        psi = [&](std::size_t i) { return ef->psi(pop[i].y, r.theta); };
        jac = jacobian_avg(*ef, pop, wv, r.theta);
        break;
    }
    const Eigen::Index d = r.theta.size();

    Matrix v_super = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < N; ++i) {
      if (wv[i] == 0.0) continue;
      const Vector p = psi(i);
      v_super += wv[i] * p * p.transpose();
    }
    v_super /= static_cast<double>(N);

    std::optional<Matrix> v_prime;
    if (scheme == "unit") {
      v_prime = Matrix::Zero(d, d);
    } else if (scheme == "bigdata") {
      r.note = "design variance undefined for big-data-only weights";
    } else if (const auto strata = srswor_strata(t)) {
      std::vector<StratumSample> samples;
      for (const auto& st : *strata) {
        std::vector<std::size_t> rows;
        for (std::size_t i : st.sampled)
          if (scheme != "di" || !(*t.delta)[i]) rows.push_back(i);
        StratumSample s;
        s.n = st.sampled.size();
        s.N = st.N;
        s.psi.resize(static_cast<Eigen::Index>(rows.size()), d);
        for (std::size_t k = 0; k < rows.size(); ++k)
          s.psi.row(static_cast<Eigen::Index>(k)) = psi(rows[k]).transpose();
        samples.push_back(std::move(s));
      }
      v_prime = vprime_stratified_srswor(samples);
    } else {
      r.note = "pi differs from n_h/N_h; second-order inclusion probabilities unavailable";
    }
    if (v_prime) r.variance = assemble(jac, *v_prime, v_super, N);
  } catch (const DomainError& e) {
    r.note = e.what();
  } catch (const SolverError& e) {
    r.note = e.what();
  }
  return r;
}

ordered_json report_json(const EstimateReport& r, bool full) {
  ordered_json j;
  j["statistic"] = r.stat.name;
  if (r.stat.kind == StatisticKind::Quantile) j["p"] = r.stat.p;
  j["weights"] = r.weights;
  j["N"] = r.N;
  j["n_used"] = r.n_used;
  j["theta"] = std::vector<double>(r.theta.data(), r.theta.data() + r.theta.size());
  if (r.variance) {
    const auto& v = *r.variance;
    std::vector<double> dse, jse;
    for (Eigen::Index k = 0; k < r.theta.size(); ++k) {
      dse.push_back(std::sqrt(std::max(0.0, v.design_var(k, k))));
      jse.push_back(std::sqrt(std::max(0.0, (*v.joint_var)(k, k))));
    }
    j["design_se"] = dse;
    j["joint_se"] = jse;
    if (full) {
      j["v_prime"] = matrix_json(v.v_prime);
      j["v_super"] = matrix_json(*v.v_super);
      j["jacobian"] = matrix_json(v.jac);
      j["design_var"] = matrix_json(v.design_var);
      j["joint_var"] = matrix_json(*v.joint_var);
    }
  } else {
    j["design_se"] = nullptr;
    j["joint_se"] = nullptr;
  }
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

void print_report(const EstimateReport& r, bool full, std::ostream& out) {
  out << "statistic  " << r.stat.name;
  if (r.stat.kind == StatisticKind::Quantile) out << " (p=" << g6(r.stat.p) << ")";
  out << "\nweights    " << r.weights << "\nN          " << r.N << "\nobserved   " << r.n_used << "\n";
  for (Eigen::Index k = 0; k < r.theta.size(); ++k) {
    out << "theta";
    if (r.theta.size() > 1) out << "[" << k + 1 << "]";
    out << "      " << g6(r.theta(k));
    if (r.variance) {
      out << "  design SE " << g6(std::sqrt(std::max(0.0, r.variance->design_var(k, k))))
          << "  joint SE " << g6(std::sqrt(std::max(0.0, (*r.variance->joint_var)(k, k))));
    } else {
      out << "  design SE n/a  joint SE n/a";
    }
    out << "\n";
  }
  if (full && r.variance) {
    auto show = [&](const char* name, const Matrix& m) {
      out << name << "\n";
      for (Eigen::Index a = 0; a < m.rows(); ++a) {
        out << "  ";
        for (Eigen::Index b = 0; b < m.cols(); ++b) out << (b ? " " : "") << g6(m(a, b));
        out << "\n";
      }
    };
    show("v_prime", r.variance->v_prime);
    show("v_super", *r.variance->v_super);
    show("jacobian", r.variance->jac);
    show("design_var", r.variance->design_var);
    show("joint_var", *r.variance->joint_var);
  }
  if (!r.note.empty()) out << "note       " << r.note << "\n";
}

// ---- allocation -------------------------------------------------------------

ordered_json allocate(const DataTable& t, const StatisticChoice& stat, double f_total,
                      std::ostream& out) {
  const std::size_t N = t.rows();
  const std::vector<double> unit(N, 1.0);
  std::vector<double> psi(N);
  double jac = 0.0;
  double theta = 0.0;
  switch (stat.kind) {
    case StatisticKind::Mean: {
      for (double v : t.y) theta += v;
      theta /= static_cast<double>(N);
      for (std::size_t i = 0; i < N; ++i) psi[i] = psi_mean(t.y[i], theta);
      jac = -1.0;
      break;
    }
    case StatisticKind::Quantile: {
      theta = weighted_quantile(t.y, unit, stat.p).scalar();
      for (std::size_t i = 0; i < N; ++i) psi[i] = psi_quantile(t.y[i], theta, stat.p);
      jac = density_jacobian(t.y, unit, theta)(0, 0);
      break;
    }
    case StatisticKind::Gini: {
      theta = gini(t.y, unit).scalar();
      const GiniPsiHat g(t.y, unit);
      double s = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        psi[i] = g(t.y[i], theta);
        s += t.y[i];
      }
      jac = -s / static_cast<double>(N);
      break;
    }
    default:
      throw ConfigError("allocate supports scalar statistics only (mean, median, quantile, gini)");
  }

  const StratifiedFrame frame = StratifiedFrame::from_labels(t.strata());
  const std::size_t H = frame.strata();
  AllocationBounds bounds;
  std::vector<double> s2(H, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    const auto members = frame.members(h);
    const auto Nh = static_cast<double>(members.size());
    if (members.size() < 2) throw DomainError("allocate: every stratum needs at least two units");
    double mean = 0.0;
    for (std::size_t i : members) mean += psi[i];
    mean /= Nh;
    for (std::size_t i : members) s2[h] += (psi[i] - mean) * (psi[i] - mean);
    s2[h] /= Nh - 1.0;
    bounds.stratum_fraction.push_back(frame.fraction(h));
    bounds.lo.push_back(std::min(1.0, 2.0 / Nh));
    bounds.hi.push_back(1.0);
  }
  const double scale = 1.0 / (static_cast<double>(N) * jac * jac);
  const VarianceFn variance = [&](std::span<const double> f) {
    double v = 0.0;
    for (std::size_t h = 0; h < H; ++h) {
      if (s2[h] == 0.0 || f[h] >= 1.0) continue;
      if (!(f[h] > 0.0)) return std::numeric_limits<double>::infinity();
      v += bounds.stratum_fraction[h] * (1.0 - f[h]) / f[h] * s2[h];
    }
    return v * scale;
  };
  const AllocationPlan plan = allocate_optimal(variance, f_total, bounds);

  ordered_json j;
  j["statistic"] = stat.name;
  j["theta"] = theta;
  j["f_total"] = f_total;
  ordered_json strata = ordered_json::array();
  out << "stratum  N_h  F_h  f_h  n_h\n";
  for (std::size_t h = 0; h < H; ++h) {
    const double nh = plan.f[h] * static_cast<double>(frame.stratum_size(h));
    out << frame.label(h) << "  " << frame.stratum_size(h) << "  " << g6(bounds.stratum_fraction[h])
        << "  " << g6(plan.f[h]) << "  " << g6(nh) << "\n";
    ordered_json s;
    s["stratum"] = frame.label(h);
    s["N"] = frame.stratum_size(h);
    s["F"] = bounds.stratum_fraction[h];
    s["f"] = plan.f[h];
    s["n"] = nh;
    strata.push_back(std::move(s));
  }
  j["strata"] = std::move(strata);
  j["design_variance"] = *plan.variance;
  out << "predicted design variance  " << g6(*plan.variance) << "\n";
  return j;
}

// ---- superpopulation ------------------------------------------------------------

ordered_json describe_superpop(const SuperpopSpec& spec, std::ostream& out) {
  ordered_json j;
  j["label"] = spec.label;
  ordered_json strata = ordered_json::array();
  std::vector<double> p;
  std::vector<MonotoneCdf> cdfs;
  out << "stratum  proportion  median  fitted_median  mean  top_bracket\n";
  for (std::size_t h = 0; h < spec.strata.size(); ++h) {
    const auto& s = spec.strata[h];
    const FittedStratum fit = fit_stratum_cdf(s);
    out << h << "  " << g6(s.proportion) << "  " << g6(s.median) << "  " << g6(fit.cdf.quantile(0.5))
        << "  " << g6(fit.cdf.mean()) << "  " << g6(fit.top_bracket) << "\n";
    ordered_json e;
    e["proportion"] = s.proportion;
    e["median"] = s.median;
    e["fitted_median"] = fit.cdf.quantile(0.5);
    e["mean"] = fit.cdf.mean();
    e["top_bracket"] = fit.top_bracket;
    strata.push_back(std::move(e));
    p.push_back(s.proportion);
    cdfs.push_back(fit.cdf);
  }
  const TrueFunctionals tf = true_functionals(mixture(std::move(p), std::move(cdfs)));
  out << "superpopulation median  " << g6(tf.median) << "\nsuperpopulation mean    " << g6(tf.mean)
      << "\nsuperpopulation gini    " << g6(tf.gini) << "\n";
  j["strata"] = std::move(strata);
  j["median"] = tf.median;
  j["mean"] = tf.mean;
  j["gini"] = tf.gini;
  return j;
}

// ---- simulation -------------------------------------------------------------------

std::uint64_t config_hash(const std::filesystem::path& config) {
  const std::string text = read_text(config);
  std::uint64_t h = fnv1a64(text);
  const auto root = nlohmann::json::parse(text, nullptr, false);
  if (!root.is_discarded() && root.is_object() && root.contains("superpop") &&
      root.at("superpop").is_string())
    h = fnv1a64(read_text(config.parent_path() / root.at("superpop").get<std::string>()), h);
  return h;
}

int simulate(const std::filesystem::path& config, const std::filesystem::path& out_dir,
             std::optional<std::uint64_t> seed, unsigned workers, bool verbose, std::ostream& out,
             std::ostream& err) {
  StudyConfig cfg = load_study_config(config);
  if (seed) cfg.seed = *seed;
  const std::uint64_t hash = config_hash(config);
  const Study study(std::move(cfg));
  const auto& c = study.config();
  if (verbose)
    err << "truth: median " << g6(study.truths().functionals.median) << ", gini "
        << g6(study.truths().functionals.gini) << "\n";
  Study::Progress progress;
  if (verbose)
    progress = [&err](std::size_t done, std::size_t total) {
      if (done == total || done % std::max<std::size_t>(1, total / 10) == 0)
        err << "replicates " << done << "/" << total << "\n";
    };
  const Study::Output result = study.run(workers, progress);
  const auto files = export_csv(result.summary, out_dir);

  ordered_json manifest;
  manifest["tool"] = "bdsurvey simulate";
  manifest["version"] = BDSURVEY_VERSION;
  manifest["seed"] = c.seed;
  manifest["config_hash"] = "fnv1a64:" + hex64(hash);
  manifest["replicates"] = c.replicates;
  manifest["population_sizes"] = c.population_sizes;
  ordered_json failures = ordered_json::array();
  for (std::size_t k = 0; k < c.population_sizes.size(); ++k)
    failures.push_back({{"N", c.population_sizes[k]}, {"failed", result.failures[k]}});
  manifest["failures"] = std::move(failures);
  manifest["truth"] = {{"median", study.truths().functionals.median},
                       {"gini", study.truths().functionals.gini},
                       {"mean", study.truths().functionals.mean}};
  manifest["bias_ci"] = "mean - truth +/- 1.96 s / sqrt(R)";
  manifest["variance_ci"] =
      "N s^2 +/- 1.96 N SE(s^2), SE from the fourth central moment (normal approximation)";
  manifest["reference_draws"] = c.reference_draws;
  ordered_json names = ordered_json::array();
  for (const auto& f : files) names.push_back(f.filename().string());
  manifest["files"] = std::move(names);
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");

  out << "N  statistic  estimator  bias  [ci]  N*var  [ci]\n";
  for (const auto& cell : result.summary.cells) {
    out << cell.N << "  " << to_string(cell.stat) << "  " << to_string(cell.estimator) << "  ";
    if (!cell.available) {
      out << "unavailable\n";
      continue;
    }
    out << g6(cell.bias) << " [" << g6(cell.bias_lo) << ", " << g6(cell.bias_hi) << "]  "
        << g6(cell.variance) << " [" << g6(cell.variance_lo) << ", " << g6(cell.variance_hi) << "]\n";
  }
  for (const auto& line : result.summary.asymptotic)
    out << "asymptotic  " << to_string(line.stat) << "  " << to_string(line.estimator) << "  "
        << g6(line.value) << "\n";
  out << "wrote " << files.size() + 1 << " files to " << out_dir.string() << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Design-based estimation with survey and big-data sources", "bdsurvey"};
  app.set_version_flag("--version", BDSURVEY_VERSION);
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("--verbose,-v", verbose, "Progress and diagnostics on stderr");

  std::string data, statistic = "mean", weights = "unit", config, out_dir;
  double p = 0.5;
  double f_total = 0.0;
  std::uint64_t seed = 0;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());

  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--data", data, "CSV with columns y[, x1..xk, stratum, delta, alpha, pi]")->required();
    sub->add_option("--statistic", statistic, "mean, median, quantile, gini or linreg");
    sub->add_option("--p", p, "Quantile level for --statistic quantile");
    sub->add_option("--out", out_dir, "Directory for the JSON report");
  };
  CLI::App* est = app.add_subcommand("estimate", "Point estimate with design and joint standard errors");
  add_data(est);
  est->add_option("--weights", weights, "unit, ht, di or bigdata");
  CLI::App* var = app.add_subcommand("variance", "Full variance report for an estimate");
  add_data(var);
  var->add_option("--weights", weights, "unit, ht, di or bigdata");
  CLI::App* alloc = app.add_subcommand("allocate", "Optimal allocation of a total sampling fraction");
  add_data(alloc);
  alloc->add_option("--f-total", f_total, "Overall sampling fraction sum_h F_h f_h")->required();
  CLI::App* sp = app.add_subcommand("superpop", "Fit a superpopulation spec and report its functionals");
  sp->add_option("--config", config, "Superpopulation spec (JSON)")->required();
  sp->add_option("--out", out_dir, "Directory for the JSON report");
  CLI::App* sim = app.add_subcommand("simulate", "Run a Monte Carlo study");
  sim->add_option("--config", config, "Study config (JSON)")->required();
  sim->add_option("--out", out_dir, "Output directory")->required();
  CLI::Option* seed_opt = sim->add_option("--seed", seed, "Override the master seed");
  sim->add_option("--workers", workers, "Worker threads (output does not depend on it)")
      ->check(CLI::PositiveNumber);
  for (CLI::App* sub : {est, var, alloc, sp, sim}) sub->add_flag("--verbose,-v", verbose, "Diagnostics on stderr");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*est || *var) {
      const bool full = static_cast<bool>(*var);
      const DataTable t = read_data_csv(data);
      const EstimateReport r = estimate(t, parse_statistic_choice(statistic, p), weights);
      print_report(r, full, out);
      if (!out_dir.empty())
        write_text(std::filesystem::path(out_dir) / (full ? "variance.json" : "estimate.json"),
                   report_json(r, full).dump(2) + "\n");
    } else if (*alloc) {
      const DataTable t = read_data_csv(data);
      const ordered_json j = allocate(t, parse_statistic_choice(statistic, p), f_total, out);
      if (!out_dir.empty())
        write_text(std::filesystem::path(out_dir) / "allocation.json", j.dump(2) + "\n");
    } else if (*sp) {
      const ordered_json j = describe_superpop(load_superpop_spec(config), out);
      if (!out_dir.empty())
        write_text(std::filesystem::path(out_dir) / "superpop.json", j.dump(2) + "\n");
    } else if (*sim) {
      return simulate(config, out_dir,
                      seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt, workers,
                      verbose, out, err);
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const DesignInformationError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const UnsupportedStrategyError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return kNumeric;
  }
}

}  // namespace bdsurvey::cli
