#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ngtrend/noise_model.hpp"

namespace ngtrend {

/// Piecewise-constant trend plus Gaussian noise. Bounds are 1-based:
/// segment k covers indices [bounds[k], bounds[k+1]) and the last segment
/// also includes bounds.back() == n.
struct JumpSpec {
  std::size_t n = 500;
  std::vector<std::size_t> segment_bounds = {1, 100, 250, 350, 500};
  std::vector<double> segment_levels = {0.0, 2.0, -1.0, 1.0};
  double obs_sigma2 = 1.0;
  std::uint64_t seed = 42;
};

/// The default three-jump layout rescaled to length n (a single flat segment
/// when n is too short to hold four).
JumpSpec default_jump_spec(std::size_t n = 500);

/// Throws Error(kInvalidSpec).
void validate(const JumpSpec& spec);

struct SyntheticSeries {
  std::vector<double> y;
  std::vector<double> truth;
};

SyntheticSeries generate(const JumpSpec& spec);

/// Draws from the trend model itself: t_n = t_{n-1} + v_n with v ~ sys_noise,
/// y_n = t_n + N(0, obs_sigma2). t_0 = start.
SyntheticSeries simulate_trend(std::size_t n, const NoiseModel& sys_noise, double obs_sigma2,
                               std::uint64_t seed, double start = 0.0);

}  // namespace ngtrend
