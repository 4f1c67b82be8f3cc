#pragma once

#include <bdsurvey/types.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace bdsurvey::cli {

/// Columns of an input data file. Recognised headers: y, x1..xk, stratum,
/// delta, alpha, pi. Every row is one population unit.
struct DataTable {
  std::vector<double> y;
  std::vector<std::vector<double>> x;  // x[j][i] is regressor j+1 of unit i
  std::optional<std::vector<int>> stratum;
  std::optional<Indicator> delta;
  std::optional<Indicator> alpha;
  std::optional<std::vector<double>> pi;

  std::size_t rows() const { return y.size(); }
  Population observations() const;
  std::vector<int> strata() const;
};

/// Errors name the source and 1-based line number.
DataTable parse_data_csv(std::string_view text, std::string_view source);
DataTable read_data_csv(const std::filesystem::path& path);

}  // namespace bdsurvey::cli
