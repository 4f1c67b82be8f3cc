#include "bdsurvey/mc.hpp"

#include "bdsurvey/solve.hpp"
#include "bdsurvey/variance.hpp"
#include "bdsurvey/weights.hpp"

#include "json.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace bdsurvey {

std::string to_string(Statistic s) { return s == Statistic::Median ? "median" : "gini"; }

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::BigData: return "big_data";
    case Estimator::SurveyOnly: return "survey_only";
    case Estimator::Integrated: return "integrated";
    case Estimator::StratIntegrated: return "strat_integrated";
  }
  return "unknown";
}

Statistic parse_statistic(std::string_view s) {
  if (s == "median") return Statistic::Median;
  if (s == "gini") return Statistic::Gini;
  throw ConfigError("unknown statistic '" + std::string(s) + "'");
}

Estimator parse_estimator(std::string_view s) {
  for (Estimator e : kEstimators)
    if (to_string(e) == s) return e;
  throw ConfigError("unknown estimator '" + std::string(s) + "'");
}

void StudyConfig::validate() const {
  if (superpop.strata.empty()) throw ConfigError("study config: superpopulation has no strata");
  if (population_sizes.empty()) throw ConfigError("study config: population_sizes is empty");
  for (std::size_t k = 0; k < population_sizes.size(); ++k) {
    if (population_sizes[k] == 0) throw ConfigError("study config: population sizes must be positive");
    if (k > 0 && population_sizes[k] <= population_sizes[k - 1])
      throw ConfigError("study config: population_sizes must be strictly increasing");
  }
  if (!(sampling_fraction > 0.0 && sampling_fraction < 1.0))
    throw ConfigError("study config: sampling_fraction must lie in (0, 1)");
  if (!(low_rate > 0.0 && low_rate <= 1.0))
    throw ConfigError("study config: bigdata.low_rate must lie in (0, 1]");
  if (!(bigdata_share >= 0.0 && bigdata_share < 1.0))
    throw ConfigError("study config: bigdata.share must lie in [0, 1)");
  if (!std::isfinite(threshold)) throw ConfigError("study config: bigdata.threshold must be finite");
  if (replicates < 2) throw ConfigError("study config: replicates must be at least 2");
  if (statistics.empty()) throw ConfigError("study config: statistics is empty");
  std::set<Statistic> seen(statistics.begin(), statistics.end());
  if (seen.size() != statistics.size()) throw ConfigError("study config: duplicate statistic");
  if (reference_draws != 0 && reference_draws < 10000)
    throw ConfigError("study config: reference_draws must be 0 or at least 10000");
}

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double get_number(const json& j, const char* key, const char* where) {
  if (!j.at(key).is_number())
    throw ConfigError(std::string(where) + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

std::size_t get_count(const json& j, const char* key, const char* where) {
  if (!j.at(key).is_number_unsigned())
    throw ConfigError(std::string(where) + ": '" + key + "' must be a nonnegative integer");
  return j.at(key).get<std::size_t>();
}

}  // namespace

StudyConfig parse_study_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("study config: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("study config: top level must be an object");
  static const std::set<std::string> known{"superpop", "population_sizes", "sampling_fraction",
                                          "bigdata", "replicates", "seed", "statistics",
                                          "reference_draws", "label"};
  for (const auto& [key, value] : root.items())
    if (!known.count(key)) throw ConfigError("study config: unknown field '" + key + "'");
  for (const char* key : {"superpop", "population_sizes", "sampling_fraction", "bigdata",
                          "replicates", "seed"})
    if (!root.contains(key)) throw ConfigError(std::string("study config: missing field '") + key + "'");

  StudyConfig cfg;
  const json& sp = root.at("superpop");
  if (sp.is_string()) {
    cfg.superpop = parse_superpop_spec(read_file(base_dir / sp.get<std::string>()));
  } else if (sp.is_object()) {
    cfg.superpop = parse_superpop_spec(sp.dump());
  } else {
    throw ConfigError("study config: 'superpop' must be a path or an object");
  }

  if (!root.at("population_sizes").is_array())
    throw ConfigError("study config: 'population_sizes' must be an array");
  for (const auto& v : root.at("population_sizes")) {
    if (!v.is_number_unsigned()) throw ConfigError("study config: population sizes must be positive integers");
    cfg.population_sizes.push_back(v.get<std::size_t>());
  }
  cfg.sampling_fraction = get_number(root, "sampling_fraction", "study config");
  const json& bd = root.at("bigdata");
  if (!bd.is_object()) throw ConfigError("study config: 'bigdata' must be an object");
  for (const auto& [key, value] : bd.items())
    if (key != "threshold" && key != "low_rate" && key != "share")
      throw ConfigError("study config: unknown field 'bigdata." + key + "'");
  for (const char* key : {"threshold", "low_rate", "share"})
    if (!bd.contains(key)) throw ConfigError(std::string("study config: missing field 'bigdata.") + key + "'");
  cfg.threshold = get_number(bd, "threshold", "study config: bigdata");
  cfg.low_rate = get_number(bd, "low_rate", "study config: bigdata");
  cfg.bigdata_share = get_number(bd, "share", "study config: bigdata");
  cfg.replicates = get_count(root, "replicates", "study config");
  cfg.seed = get_count(root, "seed", "study config");
  if (root.contains("statistics")) {
    if (!root.at("statistics").is_array()) throw ConfigError("study config: 'statistics' must be an array");
    cfg.statistics.clear();
    for (const auto& v : root.at("statistics")) {
      if (!v.is_string()) throw ConfigError("study config: statistics must be strings");
      cfg.statistics.push_back(parse_statistic(v.get<std::string>()));
    }
  }
  if (root.contains("reference_draws")) cfg.reference_draws = get_count(root, "reference_draws", "study config");
  cfg.validate();
  return cfg;
}

StudyConfig load_study_config(const std::filesystem::path& path) {
  return parse_study_config(read_file(path), path.parent_path());
}

const SummaryCell* StudySummary::find(std::size_t N, Statistic s, Estimator e) const {
  for (const auto& c : cells)
    if (c.N == N && c.stat == s && c.estimator == e) return &c;
  return nullptr;
}

namespace {

constexpr double kZ = 1.96;

struct ScalarVariance {
  double design;
  double joint;
};

// Design and joint variance of a scalar estimate under stratified SRSWOR.
// Rows of the design variance come from A_h \ B_h.
ScalarVariance scalar_variance(Statistic stat, std::span<const double> y,
                               std::span<const double> w, double theta,
                               std::span<const StratumDesign> strata,
                               std::span<const std::uint8_t> big_set) {
  const std::size_t N = y.size();
  std::optional<GiniPsiHat> gini_psi;
  if (stat == Statistic::Gini) gini_psi.emplace(y, w);
  auto psi = [&](double yi) {
    return stat == Statistic::Median ? psi_quantile(yi, theta, 0.5) : (*gini_psi)(yi, theta);
  };

  std::vector<StratumSample> samples;
  samples.reserve(strata.size());
  for (const auto& st : strata) {
    std::vector<double> rows;
    for (std::size_t i : st.sampled)
      if (big_set.empty() || !big_set[i]) rows.push_back(psi(y[i]));
    StratumSample s;
    s.psi = Eigen::Map<const Matrix>(rows.data(), static_cast<Eigen::Index>(rows.size()), 1);
    s.n = st.sampled.size();
    s.N = st.N;
    samples.push_back(std::move(s));
  }
  const double v_prime = vprime_stratified_srswor(samples)(0, 0);

  double v_super = 0.0;
  double wy = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    if (w[i] == 0.0) continue;
    const double p = psi(y[i]);
    v_super += w[i] * p * p;
    wy += w[i] * y[i];
  }
  v_super /= static_cast<double>(N);
  const double jac = stat == Statistic::Median ? density_jacobian(y, w, theta)(0, 0)
                                               : -wy / static_cast<double>(N);
  const VarianceReport r = assemble(Matrix::Constant(1, 1, jac), Matrix::Constant(1, 1, v_prime),
                                    Matrix::Constant(1, 1, v_super), N);
  return {r.design_var(0, 0), (*r.joint_var)(0, 0)};
}

double point_estimate(Statistic stat, std::span<const double> y, std::span<const double> w) {
  return stat == Statistic::Median ? weighted_quantile(y, w, 0.5).scalar() : gini(y, w).scalar();
}

bool is_recoverable(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const DomainError&) {
    return true;
  } catch (const SolverError&) {
    return true;
  } catch (const RankDeficiencyError&) {
    return true;
  } catch (const NumericError&) {
    return true;
  } catch (...) {
    return false;
  }
}

}  // namespace

Study::Study(StudyConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))),
      model_(build_model(cfg_.superpop)),
      truths_{true_functionals(model_)} {}

ReplicateResult Study::estimate(std::size_t k, std::size_t replicate, std::span<const double> y,
                                std::span<const int> labels) const {
  ReplicateResult out;
  out.k = k;
  out.replicate = replicate;
  out.N = y.size();
  const std::string tag = "/" + std::to_string(k);
  try {
    const std::size_t N = y.size();
    RngStream big_rng = RngStream::derive(cfg_.seed, replicate, "bigdata" + tag);
    const BigDataMechanism mech{
        cfg_.threshold, cfg_.low_rate,
        static_cast<std::size_t>(std::llround(cfg_.bigdata_share * static_cast<double>(N)))};
    const Indicator delta = bigdata_select(y, mech, big_rng);

    const StratifiedFrame frame = StratifiedFrame::from_labels(labels);
    const auto n = static_cast<std::size_t>(std::llround(cfg_.sampling_fraction * static_cast<double>(N)));
    RngStream survey_rng = RngStream::derive(cfg_.seed, replicate, "survey" + tag);
    const StratifiedSample a = stratified_srswor(frame, neyman_allocate(frame, y, n), survey_rng);

    const StratifiedFrame eligible = frame.excluding(delta);
    const std::size_t capacity = N - static_cast<std::size_t>(std::count(delta.begin(), delta.end(), 1));
    RngStream prime_rng = RngStream::derive(cfg_.seed, replicate, "survey_prime" + tag);
    const StratifiedSample a_prime = stratified_srswor(
        frame, neyman_allocate(eligible, y, std::min(n, capacity)), prime_rng, delta);

    const WeightVector w_big = WeightVector::big_data_only(delta);
    const WeightVector w_ht = horvitz_thompson(a.membership);
    const WeightVector w_di = integrate(delta, w_ht);
    const WeightVector w_di_prime = integrate(delta, horvitz_thompson(a_prime.membership));
    const bool has_big = w_big.sample_size() > 0;
    const std::array<WeightVector, 4> weights{has_big ? normalize(w_big) : w_big, normalize(w_ht),
                                              normalize(w_di), normalize(w_di_prime)};
    const std::vector<double> unit(N, 1.0);

    for (Statistic stat : cfg_.statistics) {
      StatisticRecord rec;
      rec.stat = stat;
      rec.population_value = point_estimate(stat, y, unit);
      for (std::size_t e = 0; e < kEstimators.size(); ++e) {
        const auto w = weights[e].values();
        rec.estimates[e].value = (e == 0 && !has_big) ? std::numeric_limits<double>::quiet_NaN()
                                                      : point_estimate(stat, y, w);
      }
      const auto fill = [&](Estimator e, std::span<const StratumDesign> strata,
                            std::span<const std::uint8_t> big) {
        auto& r = rec.estimates[static_cast<std::size_t>(e)];
        const ScalarVariance v =
            scalar_variance(stat, y, weights[static_cast<std::size_t>(e)].values(), r.value, strata, big);
        r.design_var = v.design;
        r.joint_var = v.joint;
      };
      fill(Estimator::SurveyOnly, a.strata, {});
      fill(Estimator::Integrated, a.strata, delta);
      fill(Estimator::StratIntegrated, a_prime.strata, delta);
      out.stats.push_back(std::move(rec));
    }
  } catch (...) {
    const auto err = std::current_exception();
    if (!is_recoverable(err)) throw;
    out.ok = false;
    out.stats.clear();
    try {
      std::rethrow_exception(err);
    } catch (const std::exception& e) {
      out.failure = e.what();
    }
  }
  return out;
}

ReplicateResult Study::run_replicate(std::size_t k, std::size_t replicate, bool keep_population) const {
  if (k >= cfg_.population_sizes.size()) throw DomainError("run_replicate: population index out of range");
  RngStream rng = RngStream::derive(cfg_.seed, replicate, "population");
  const auto pop = model_.sample(cfg_.population_sizes.back(), rng);
  const std::size_t N = cfg_.population_sizes[k];
  const std::span<const double> y(pop.y.data(), N);
  ReplicateResult r = estimate(k, replicate, y, std::span<const int>(pop.stratum.data(), N));
  if (keep_population) r.population.assign(y.begin(), y.end());
  return r;
}

std::vector<ReplicateResult> Study::run_replicates(std::size_t replicate) const {
  RngStream rng = RngStream::derive(cfg_.seed, replicate, "population");
  const auto pop = model_.sample(cfg_.population_sizes.back(), rng);
  std::vector<ReplicateResult> out;
  for (std::size_t k = 0; k < cfg_.population_sizes.size(); ++k) {
    const std::size_t N = cfg_.population_sizes[k];
    out.push_back(estimate(k, replicate, std::span<const double>(pop.y.data(), N),
                           std::span<const int>(pop.stratum.data(), N)));
  }
  return out;
}

std::vector<ReplicateResult> Study::run_all(unsigned workers, const Progress& progress) const {
  const std::size_t R = cfg_.replicates;
  std::vector<std::vector<ReplicateResult>> by_rep(R);
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mu;
  std::exception_ptr failure;

  auto work = [&] {
    for (;;) {
      const std::size_t rep = next.fetch_add(1);
      if (rep >= R) return;
      try {
        by_rep[rep] = run_replicates(rep);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next.store(R);
        return;
      }
      if (progress) {
        std::lock_guard lock(mu);
        progress(++done, R);
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(R)));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ReplicateResult> out;
  out.reserve(R * cfg_.population_sizes.size());
  for (std::size_t k = 0; k < cfg_.population_sizes.size(); ++k)
    for (std::size_t rep = 0; rep < R; ++rep) out.push_back(std::move(by_rep[rep][k]));
  return out;
}

std::vector<AsymptoticLine> Study::asymptotic_lines() const {
  std::vector<AsymptoticLine> out;
  if (cfg_.reference_draws == 0) return out;
  const std::array<std::pair<Estimator, SurveyDesign>, 3> designs{
      {{Estimator::SurveyOnly, SurveyDesign::SurveyOnly},
       {Estimator::Integrated, SurveyDesign::Integrated},
       {Estimator::StratIntegrated, SurveyDesign::StratIntegrated}}};
  for (Statistic stat : cfg_.statistics) {
    for (const auto& [est, kind] : designs) {
      RngStream rng = RngStream::derive(cfg_.seed, ~std::uint64_t{0}, "reference");
      const ReferenceDesign design{kind, cfg_.sampling_fraction, cfg_.threshold, cfg_.low_rate,
                                   cfg_.bigdata_share};
      const ReferenceVariance ref = reference_vprime(
          model_, truths_.functionals,
          stat == Statistic::Median ? StatisticKind::Quantile : StatisticKind::Gini, design,
          cfg_.reference_draws, rng);
      out.push_back({stat, est, ref.asymptotic, ref.draws});
    }
  }
  return out;
}

StudySummary summarize(std::span<const ReplicateResult> results, const StudyConfig& cfg,
                       const Truths& truths) {
  StudySummary out;
  out.population_sizes = cfg.population_sizes;
  for (std::size_t k = 0; k < cfg.population_sizes.size(); ++k) {
    const std::size_t N = cfg.population_sizes[k];
    const auto Nd = static_cast<double>(N);
    for (std::size_t si = 0; si < cfg.statistics.size(); ++si) {
      const Statistic stat = cfg.statistics[si];
      for (Estimator est : kEstimators) {
        SummaryCell cell;
        cell.N = N;
        cell.stat = stat;
        cell.estimator = est;
        std::vector<double> values;
        std::vector<double> joint;
        for (const auto& r : results) {
          if (r.k != k) continue;
          if (!r.ok) {
            ++cell.failed;
            continue;
          }
          for (const auto& rec : r.stats) {
            if (rec.stat != stat) continue;
            if (!std::isfinite(rec[est].value)) continue;  // empty big-data set
            values.push_back(rec[est].value);
            if (rec[est].joint_var) joint.push_back(*rec[est].joint_var);
          }
        }
        cell.used = values.size();
        if (values.size() >= 2) {
          cell.available = true;
          const auto R = static_cast<double>(values.size());
          double mean = 0.0;
          for (double v : values) mean += v;
          mean /= R;
          double m2 = 0.0;
          double m4 = 0.0;
          for (double v : values) {
            const double d = (v - mean) * (v - mean);
            m2 += d;
            m4 += d * d;
          }
          const double s2 = m2 / (R - 1.0);
          m4 /= R;
          const double se_bias = std::sqrt(s2 / R);
          cell.bias = mean - truths.value(stat);
          cell.bias_lo = cell.bias - kZ * se_bias;
          cell.bias_hi = cell.bias + kZ * se_bias;
          const double var_s2 = std::max(0.0, (m4 - s2 * s2 * (R - 3.0) / (R - 1.0)) / R);
          const double se_var = std::sqrt(var_s2);
          cell.variance = Nd * s2;
          cell.variance_lo = Nd * (s2 - kZ * se_var);
          cell.variance_hi = Nd * (s2 + kZ * se_var);
          if (joint.size() == values.size()) {
            double jm = 0.0;
            for (double v : joint) jm += v;
            cell.mean_joint_var = Nd * jm / R;
          }
        }
        out.cells.push_back(cell);
      }
    }
  }
  return out;
}

Study::Output Study::run(unsigned workers, const Progress& progress) const {
  const auto results = run_all(workers, progress);
  Output out;
  out.failures.assign(cfg_.population_sizes.size(), 0);
  std::vector<std::string> first_reason(cfg_.population_sizes.size());
  for (const auto& r : results) {
    if (r.ok) continue;
    if (out.failures[r.k]++ == 0) first_reason[r.k] = r.failure;
  }
  for (std::size_t k = 0; k < out.failures.size(); ++k) {
    if (static_cast<double>(out.failures[k]) > 0.01 * static_cast<double>(cfg_.replicates)) {
      throw NumericError("study cell N=" + std::to_string(cfg_.population_sizes[k]) + " aborted: " +
                         std::to_string(out.failures[k]) + " of " + std::to_string(cfg_.replicates) +
                         " replicates failed (first: " + first_reason[k] + ")");
    }
  }
  out.summary = summarize(results, cfg_, truths_);
  out.summary.asymptotic = asymptotic_lines();
  return out;
}

std::vector<FigureRow> figure_rows(const StudySummary& summary, std::string_view figure) {
  std::vector<FigureRow> rows;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (figure == "asymptotic_var") {
    for (std::size_t N : summary.population_sizes)
      for (const auto& line : summary.asymptotic)
        rows.push_back({N, to_string(line.estimator), to_string(line.stat), line.value, line.value,
                        line.value});
    return rows;
  }
  const auto sep = figure.find('_');
  if (sep == std::string_view::npos) throw DomainError("unknown figure '" + std::string(figure) + "'");
  const Statistic stat = parse_statistic(figure.substr(0, sep));
  const std::string_view kind = figure.substr(sep + 1);
  if (kind != "bias" && kind != "var") throw DomainError("unknown figure '" + std::string(figure) + "'");
  for (const auto& c : summary.cells) {
    if (c.stat != stat) continue;
    FigureRow row{c.N, to_string(c.estimator), to_string(c.stat), nan, nan, nan};
    if (c.available) {
      if (kind == "bias") {
        row.value = c.bias;
        row.ci_lo = c.bias_lo;
        row.ci_hi = c.bias_hi;
      } else {
        row.value = c.variance;
        row.ci_lo = c.variance_lo;
        row.ci_hi = c.variance_hi;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::string format_figure_csv(std::span<const FigureRow> rows) {
  std::string out(kFigureHeader);
  out += '\n';
  char buf[64];
  for (const auto& r : rows) {
    out += std::to_string(r.N);
    out += ',';
    out += r.estimator;
    out += ',';
    out += r.statistic;
    for (double v : {r.value, r.ci_lo, r.ci_hi}) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::vector<FigureRow> parse_figure_csv(std::string_view text) {
  std::vector<FigureRow> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != kFigureHeader) throw ConfigError("figure csv: unexpected header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    for (std::size_t pos = 0;;) {
      const auto comma = line.find(',', pos);
      f.push_back(line.substr(pos, comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    const std::string where = "figure csv line " + std::to_string(line_no);
    if (f.size() != 6) throw ConfigError(where + ": expected 6 fields");
    FigureRow r;
    if (std::from_chars(f[0].data(), f[0].data() + f[0].size(), r.N).ec != std::errc{})
      throw ConfigError(where + ": bad N");
    r.estimator = std::string(f[1]);
    r.statistic = std::string(f[2]);
    double* slots[3] = {&r.value, &r.ci_lo, &r.ci_hi};
    for (int c = 0; c < 3; ++c) {
      const auto field = f[static_cast<std::size_t>(3 + c)];
      if (std::from_chars(field.data(), field.data() + field.size(), *slots[c]).ec != std::errc{})
        throw ConfigError(where + ": bad number");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<std::filesystem::path> export_csv(const StudySummary& summary,
                                              const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const char* figure : {"median_bias", "gini_bias", "median_var", "gini_var", "asymptotic_var"}) {
    const auto path = dir / (std::string(figure) + ".csv");
    const auto rows = figure_rows(summary, figure);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "': " + std::strerror(errno));
    out << format_figure_csv(rows);
    if (!out.flush()) throw IoError("cannot write '" + path.string() + "': " + std::strerror(errno));
    written.push_back(path);
  }
  return written;
}

}  // namespace bdsurvey
