#pragma once

#include <array>
#include <span>
#include <vector>

#include "ngtrend/grid.hpp"
#include "ngtrend/noise_model.hpp"

namespace ngtrend {

/// Trend model with general system noise and Gaussian observation noise,
/// discretized on `grid`.
struct NgModel {
  NoiseModel sys_noise;
  double obs_sigma2 = 1.0;
  Grid grid;
};

struct NgFilterOutput {
  std::vector<GridDensity> predicted;
  std::vector<GridDensity> filtered;
  /// log p(y_n | Y_{n-1}) per step; loglik is their running sum.
  std::vector<double> log_evidence;
  double loglik = 0.0;
  /// Total kernel mass pushed outside the grid over the run.
  double clipped_mass = 0.0;
};

struct NgRunResult {
  std::vector<GridDensity> predicted;
  std::vector<GridDensity> filtered;
  std::vector<GridDensity> smoothed;
  double loglik = 0.0;
  double clipped_mass = 0.0;
};

/// Default placement: [min(y) - span*sd(y), max(y) + span*sd(y)].
Grid default_grid(std::span<const double> y, std::size_t n_nodes = 800, double span = 4.0);

/// Gaussian at the diffuse state (y_1, 4 Var(y)) sampled on the grid.
GridDensity diffuse_init(const Grid& grid, std::span<const double> y);

/// Prediction by convolution with the system noise, then a Bayes update
/// with the Gaussian observation density evaluated at the nodes.
NgFilterOutput ng_filter(std::span<const double> y, const NgModel& m, const GridDensity& init,
                         ConvolutionMethod method = ConvolutionMethod::kDirect);

/// Log-likelihood only, without storing densities. Used inside optimizers.
double ng_loglik(std::span<const double> y, const NgModel& m, const GridDensity& init,
                 ConvolutionMethod method = ConvolutionMethod::kFft);

/// Fixed-interval smoother. smoothed[N-1] is filtered[N-1]; each earlier
/// step multiplies the filter density by the backward integral of the
/// smoothed/predicted ratio against the transition density.
std::vector<GridDensity> ng_smooth(const NgFilterOutput& run, const NgModel& m);

/// Filter then smoother.
NgRunResult ng_run(std::span<const double> y, const NgModel& m, const GridDensity& init);

/// Levels matching mean and +-1, 2, 3 standard deviations of a Gaussian.
inline constexpr std::array<double, 7> kBandLevels = {0.0013, 0.0227, 0.1587, 0.5,
                                                      0.8413, 0.9773, 0.9987};

struct PosteriorBands {
  /// bands[n][k] is the kBandLevels[k] percentile at step n.
  std::vector<std::array<double, 7>> bands;

  std::vector<double> median() const;
};

PosteriorBands posterior_bands(std::span<const GridDensity> smoothed);

}  // namespace ngtrend
