#pragma once

#include <functional>
#include <vector>

namespace photstat {

struct SimplexOptions {
  /// Stop when the spread of objective values across the simplex is below
  /// ftol and every vertex lies within xtol of the best one (per coordinate).
  double ftol = 1e-9;
  double xtol = 1e-6;
  int max_evaluations = 4000;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead minimization inside the box [lower, upper]; trial points are
/// projected onto the box.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                          std::vector<double> start, const std::vector<double>& step, const std::vector<double>& lower,
                          const std::vector<double>& upper, const SimplexOptions& options = {});

}  // namespace photstat
