#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace bdsurvey {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One population unit. For regression, y(0) is the regressand and the
/// remaining entries are regressors.
struct Observation {
  Vector y;
  int stratum = 0;
  bool delta = false;  // observed through the big-data source

  static Observation scalar(double value, int stratum = 0, bool delta = false) {
    Observation o;
    o.y = Vector::Constant(1, value);
    o.stratum = stratum;
    o.delta = delta;
    return o;
  }
};

using Population = std::vector<Observation>;

/// 0/1 indicator vector (big-data membership, survey membership, ...).
using Indicator = std::vector<std::uint8_t>;

}  // namespace bdsurvey
