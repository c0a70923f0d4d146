#include "ngtrend/kalman.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "ngtrend/error.hpp"

namespace ngtrend {

namespace {

void check_params(const TrendParams& p) {
  if (!std::isfinite(p.sigma2) || !(p.sigma2 > 0.0))
    throw Error(ErrorCode::kInvalidParameter, "observation variance sigma2 must be > 0");
  if (!std::isfinite(p.tau2) || p.tau2 < 0.0)
    throw Error(ErrorCode::kInvalidParameter, "system variance tau2 must be >= 0");
}

}  // namespace

GaussianState diffuse_state(std::span<const double> y) {
  if (y.empty()) throw Error(ErrorCode::kNonFiniteInput, "empty series");
  const double n = static_cast<double>(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double var = ss / n;
  return {y.front(), var > 0.0 ? 4.0 * var : 1.0};
}

KalmanOutput kalman_filter(std::span<const double> y, const TrendParams& p,
                           const GaussianState& init) {
  check_params(p);
  if (y.empty()) throw Error(ErrorCode::kNonFiniteInput, "empty series");
  if (!std::isfinite(init.mean) || !std::isfinite(init.var) || init.var < 0.0)
    throw Error(ErrorCode::kInvalidParameter, "initial state must be finite with var >= 0");

  KalmanOutput out;
  out.predicted.reserve(y.size());
  out.filtered.reserve(y.size());
  GaussianState state = init;
  double loglik = 0.0;
  for (double obs : y) {
    if (!std::isfinite(obs)) throw Error(ErrorCode::kNonFiniteInput, "observation is not finite");
    const GaussianState pred{state.mean, state.var + p.tau2};
    const double r = p.sigma2 + pred.var;
    const double innovation = obs - pred.mean;
    const double gain = pred.var / r;
    state = {pred.mean + gain * innovation, (1.0 - gain) * pred.var};
    loglik -= 0.5 * (std::log(2.0 * std::numbers::pi * r) + innovation * innovation / r);
    out.predicted.push_back(pred);
    out.filtered.push_back(state);
  }
  out.loglik = loglik;
  return out;
}

std::vector<GaussianState> kalman_smoother(std::span<const GaussianState> filtered,
                                           std::span<const GaussianState> predicted,
                                           const TrendParams& p) {
  check_params(p);
  if (filtered.size() != predicted.size())
    throw Error(ErrorCode::kLengthMismatch, "filtered and predicted runs differ in length");
  std::vector<GaussianState> smoothed(filtered.begin(), filtered.end());
  if (smoothed.size() < 2) return smoothed;
  for (std::size_t k = smoothed.size() - 1; k-- > 0;) {
    const GaussianState& next_pred = predicted[k + 1];
    // With tau2 = 0 and a degenerate state both variances vanish; the gain's
    // limit is 1 (rigid trend).
    const double gain = next_pred.var > 0.0 ? filtered[k].var / next_pred.var : 1.0;
    smoothed[k].mean = filtered[k].mean + gain * (smoothed[k + 1].mean - next_pred.mean);
    smoothed[k].var = filtered[k].var + gain * gain * (smoothed[k + 1].var - next_pred.var);
  }
  return smoothed;
}

}  // namespace ngtrend
