#pragma once

#include <span>
#include <vector>

namespace ngtrend {

/// Random-walk trend model t_n = t_{n-1} + v_n, y_n = t_n + w_n with
/// v_n ~ N(0, tau2) and w_n ~ N(0, sigma2).
struct TrendParams {
  double sigma2 = 1.0;
  double tau2 = 0.0;
};

struct GaussianState {
  double mean = 0.0;
  double var = 0.0;
};

struct KalmanOutput {
  std::vector<GaussianState> predicted;
  std::vector<GaussianState> filtered;
  double loglik = 0.0;
};

/// Diffuse start used throughout: mean y_1, variance 4 * Var(y)
/// (or 1 when the series has no spread).
GaussianState diffuse_state(std::span<const double> y);

/// Scalar Kalman filter. loglik = -1/2 sum [log(2 pi r_n) + e_n^2 / r_n].
KalmanOutput kalman_filter(std::span<const double> y, const TrendParams& p,
                           const GaussianState& init);

/// Fixed-interval (Rauch-Tung-Striebel) smoother over one filter run.
std::vector<GaussianState> kalman_smoother(std::span<const GaussianState> filtered,
                                           std::span<const GaussianState> predicted,
                                           const TrendParams& p);

}  // namespace ngtrend
