#pragma once

#include "bdsurvey/superpop.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bdsurvey {

enum class Statistic { Median, Gini };
enum class Estimator { BigData, SurveyOnly, Integrated, StratIntegrated };

inline constexpr std::array<Estimator, 4> kEstimators{Estimator::BigData, Estimator::SurveyOnly,
                                                      Estimator::Integrated,
                                                      Estimator::StratIntegrated};

std::string to_string(Statistic s);
std::string to_string(Estimator e);
Statistic parse_statistic(std::string_view s);
Estimator parse_estimator(std::string_view s);

struct StudyConfig {
  SuperpopSpec superpop;
  std::vector<std::size_t> population_sizes;  // increasing
  double sampling_fraction = 0.01;
  double threshold = 18200.0;
  double low_rate = 0.05;
  double bigdata_share = 0.5;
  std::size_t replicates = 500;
  std::uint64_t seed = 1;
  std::vector<Statistic> statistics{Statistic::Median, Statistic::Gini};
  std::size_t reference_draws = 0;  // 0 disables the asymptotic reference lines

  void validate() const;
};

/// `superpop` is either a path (relative to base_dir) or an inline spec object.
StudyConfig parse_study_config(std::string_view json_text, const std::filesystem::path& base_dir);
StudyConfig load_study_config(const std::filesystem::path& path);

struct EstimateRecord {
  double value = 0.0;
  std::optional<double> design_var;
  std::optional<double> joint_var;
};

struct StatisticRecord {
  Statistic stat = Statistic::Median;
  double population_value = 0.0;  // theta_N on the full population
  std::array<EstimateRecord, 4> estimates{};  // indexed like kEstimators

  const EstimateRecord& operator[](Estimator e) const {
    return estimates[static_cast<std::size_t>(e)];
  }
};

struct ReplicateResult {
  std::size_t k = 0;
  std::size_t replicate = 0;
  std::size_t N = 0;
  bool ok = true;
  std::string failure;
  std::vector<StatisticRecord> stats;
  std::vector<double> population;  // only filled when requested
};

struct SummaryCell {
  std::size_t N = 0;
  Statistic stat = Statistic::Median;
  Estimator estimator = Estimator::BigData;
  bool available = false;
  std::size_t used = 0;
  std::size_t failed = 0;
  double bias = 0.0, bias_lo = 0.0, bias_hi = 0.0;
  double variance = 0.0, variance_lo = 0.0, variance_hi = 0.0;  // size-adjusted
  std::optional<double> mean_joint_var;                          // size-adjusted
};

struct AsymptoticLine {
  Statistic stat = Statistic::Median;
  Estimator estimator = Estimator::SurveyOnly;
  double value = 0.0;  // size-adjusted
  std::size_t draws = 0;
};

struct StudySummary {
  std::vector<std::size_t> population_sizes;
  std::vector<SummaryCell> cells;
  std::vector<AsymptoticLine> asymptotic;

  const SummaryCell* find(std::size_t N, Statistic s, Estimator e) const;
};

struct Truths {
  TrueFunctionals functionals;
  double value(Statistic s) const { return s == Statistic::Median ? functionals.median : functionals.gini; }
};

/// Bias, size-adjusted variance and 95% intervals per (N, statistic,
/// estimator), reduced in (k, replicate) order. Failed replicates are skipped
/// and counted.
StudySummary summarize(std::span<const ReplicateResult> results, const StudyConfig& cfg,
                       const Truths& truths);

class Study {
 public:
  explicit Study(StudyConfig cfg);

  const StudyConfig& config() const { return cfg_; }
  const SuperpopModel& model() const { return model_; }
  const Truths& truths() const { return truths_; }

  /// Steps for one population size; the max-N population is generated and
  /// truncated to its first N_k units.
  ReplicateResult run_replicate(std::size_t k, std::size_t replicate,
                                bool keep_population = false) const;
  /// All population sizes of one replicate, sharing a single generated population.
  std::vector<ReplicateResult> run_replicates(std::size_t replicate) const;

  using Progress = std::function<void(std::size_t done, std::size_t total)>;
  /// All replicates on `workers` threads; results are ordered by (k, replicate)
  /// independently of the worker count.
  std::vector<ReplicateResult> run_all(unsigned workers, const Progress& progress = {}) const;

  std::vector<AsymptoticLine> asymptotic_lines() const;

  struct Output {
    StudySummary summary;
    std::vector<std::size_t> failures;  // per population size
  };
  /// Runs, summarizes and attaches asymptotic lines. A cell whose failure rate
  /// exceeds 1% aborts the study with a NumericError.
  Output run(unsigned workers, const Progress& progress = {}) const;

 private:
  ReplicateResult estimate(std::size_t k, std::size_t replicate, std::span<const double> y,
                           std::span<const int> strata) const;

  StudyConfig cfg_;
  SuperpopModel model_;
  Truths truths_;
};

struct FigureRow {
  std::size_t N = 0;
  std::string estimator;
  std::string statistic;
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;

  bool operator==(const FigureRow&) const = default;
};

inline constexpr std::string_view kFigureHeader = "N,estimator,statistic,value,ci_lo,ci_hi";

/// Rows of one figure ("median_bias", "gini_bias", "median_var", "gini_var",
/// or "asymptotic_var").
std::vector<FigureRow> figure_rows(const StudySummary& summary, std::string_view figure);
std::string format_figure_csv(std::span<const FigureRow> rows);
std::vector<FigureRow> parse_figure_csv(std::string_view text);

/// Writes the four figure CSVs plus asymptotic_var.csv into dir and returns
/// the written paths.
std::vector<std::filesystem::path> export_csv(const StudySummary& summary,
                                              const std::filesystem::path& dir);

}  // namespace bdsurvey
