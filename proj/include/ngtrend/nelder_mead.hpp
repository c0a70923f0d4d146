#pragma once

#include <functional>
#include <span>
#include <vector>

namespace ngtrend {

struct NelderMeadOptions {
  int max_evals = 400;
  /// Converged once the largest vertex-to-vertex distance drops below this.
  double diameter_tol = 1e-4;
  /// Also stop (without claiming convergence) when the objective spread over
  /// the simplex is below this; saves budget on flat plateaus.
  double value_tol = 1e-9;
  double initial_step = 0.7;
  /// Box applied to every coordinate before evaluation.
  double lower = -40.0;
  double upper = 40.0;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evals = 0;
  bool converged = false;
};

/// Minimizes f. Non-finite objective values are treated as +infinity.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> start, const NelderMeadOptions& options = {});

}  // namespace ngtrend
