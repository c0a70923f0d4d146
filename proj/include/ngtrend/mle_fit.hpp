#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ngtrend/noise_model.hpp"

namespace ngtrend {

/// What to estimate. The model doubles as the template: its family fixes the
/// parameterization and its values are the fixed values (or starting values
/// of free shape parameters).
///
/// Per family the estimable parameters are
///   sigma2      observation variance (all families),
///   dispersion  Gaussian var, Pearson tau2, generalized-Laplace tau, or the
///               var of a Gaussian first mixture component,
///   shape       Pearson / generalized-Laplace b, or the mixture alpha.
/// Non-Gaussian second mixture components are never estimated.
struct FitSpec {
  std::string name;
  NoiseModel model = Gaussian{};
  bool sigma2_free = true;
  /// Fixed value when sigma2 is not free, or the start with start_from_spec.
  double sigma2 = 1.0;
  bool dispersion_free = true;
  bool shape_free = false;
  int budget = 400;
  int restarts = 3;
  std::uint64_t seed = 1;
  std::size_t grid_nodes = 800;
  double grid_span = 4.0;
  /// Route the exact Gaussian family through the grid filter instead of the
  /// Kalman filter (cross-checks only).
  bool force_grid = false;
  /// Start the first run at sigma2 and the model's values instead of the
  /// data-driven guess and dispersion scan.
  bool start_from_spec = false;
};

struct FitResult {
  std::string name;
  NoiseModel model;
  double obs_sigma2 = 0.0;
  double loglik = 0.0;
  int k = 0;
  double aic = 0.0;
  int evals = 0;
  bool converged = false;
  /// A free parameter ended at the edge of the transformed search box.
  bool at_boundary = false;
};

/// Whether the family has a dispersion parameter (see FitSpec) and access to it.
bool has_dispersion(const NoiseModel& m);
void set_dispersion(NoiseModel& m, double value);

/// Number of free parameters the spec implies.
int free_parameter_count(const FitSpec& spec);

/// Throws Error(kInvalidSpec) on a malformed spec.
void validate(const FitSpec& spec);

/// Log-likelihood of y under the model, evaluated the same way fit() does.
double model_loglik(std::span<const double> y, const NoiseModel& model, double obs_sigma2,
                    std::size_t grid_nodes = 800, double grid_span = 4.0, bool force_grid = false);

/// Maximum likelihood by Nelder-Mead in transformed coordinates.
/// Throws kInvalidSpec for a bad spec or short series and kDegenerateData for
/// a constant series.
FitResult fit(std::span<const double> y, const FitSpec& spec);

struct ProfileRow {
  double shape = 0.0;
  std::optional<FitResult> result;
  std::string error;
};

/// One fit per fixed shape value, in input order. For a Pearson or
/// generalized-Laplace template a shape of +infinity means the Gaussian
/// limit. Row failures are recorded in ProfileRow::error.
std::vector<ProfileRow> profile(std::span<const double> y, const FitSpec& base,
                                std::span<const double> shapes);

struct ComparisonRow {
  std::string name;
  std::optional<FitResult> result;
  std::string error;
};

struct ComparisonTable {
  /// Sorted by AIC, then k, then name. Failed rows go last.
  std::vector<ComparisonRow> rows;

  std::string to_csv() const;
  std::string to_text() const;
};

ComparisonTable compare(std::span<const double> y, std::span<const FitSpec> specs);

}  // namespace ngtrend
