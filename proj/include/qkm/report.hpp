#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qkm/types.hpp"

namespace qkm {

struct ResidualReport {
  std::string name;
  double max_residual = 0.0;
  int sample_count = 0;
  /// Arguments of the worst sample (empty if there were no samples).
  std::vector<cplx> worst_point;

  /// Folds one sample in; ties keep the earlier sample, NaN counts as worst.
  void add(double residual, std::vector<cplx> point) {
    const bool worse = std::isnan(residual) ? !std::isnan(max_residual) : residual > max_residual;
    if (sample_count == 0 || worse) {
      max_residual = residual;
      worst_point = std::move(point);
    }
    ++sample_count;
  }
};

}  // namespace qkm
