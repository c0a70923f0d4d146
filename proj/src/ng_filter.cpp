#include "ngtrend/ng_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "ngtrend/error.hpp"
#include "ngtrend/kalman.hpp"

namespace ngtrend {

namespace {

// Ratio guard for the smoother: below kRatioCutoff the integrand is dropped,
// below kRatioFloor the denominator is floored.
constexpr double kRatioCutoff = 1e-300;
constexpr double kRatioFloor = 1e-250;

void check_model(const NgModel& m, const GridDensity& init) {
  validate(m.sys_noise);
  if (!std::isfinite(m.obs_sigma2) || !(m.obs_sigma2 > 0.0))
    throw Error(ErrorCode::kInvalidParameter, "observation variance must be > 0");
  if (!(init.grid() == m.grid))
    throw Error(ErrorCode::kLengthMismatch, "initial density lives on a different grid");
}

class ObservationDensity {
 public:
  ObservationDensity(const Grid& grid, double sigma2)
      : nodes_(grid.nodes()),
        values_(grid.size()),
        inv_two_var_(0.5 / sigma2),
        norm_(1.0 / std::sqrt(2.0 * std::numbers::pi * sigma2)) {}

  std::span<const double> at_nodes(double y) {
    if (!std::isfinite(y)) throw Error(ErrorCode::kNonFiniteInput, "observation is not finite");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const double d = y - nodes_[i];
      values_[i] = norm_ * std::exp(-d * d * inv_two_var_);
    }
    return values_;
  }

  double at(double y, double x) const {
    const double d = y - x;
    return norm_ * std::exp(-d * d * inv_two_var_);
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
  double inv_two_var_;
  double norm_;
};

template <class Sink>
double run_filter(std::span<const double> y, const NgModel& m, const GridDensity& init,
                  ConvolutionMethod method, double& clipped, Sink&& sink) {
  check_model(m, init);
  if (y.empty()) throw Error(ErrorCode::kNonFiniteInput, "empty series");
  const TransitionKernel kernel(m.sys_noise, m.grid);
  ObservationDensity obs(m.grid, m.obs_sigma2);

  GridDensity state = normalize(init);
  std::vector<double> spread;
  if (state.has_atom() && kernel.delta_weight() < 1.0)
    spread = kernel.translated_density(state.atom_location());

  double loglik = 0.0;
  for (double value : y) {
    GridDensity predicted = kernel.apply(state, method, &clipped, spread);
    const auto lik = obs.at_nodes(value);
    BayesUpdate upd = pointwise_bayes(predicted, lik, obs.at(value, predicted.atom_location()));
    const double log_ev = std::log(upd.evidence);
    loglik += log_ev;
    state = upd.posterior;
    sink(std::move(predicted), state, log_ev);
  }
  return loglik;
}

}  // namespace

Grid default_grid(std::span<const double> y, std::size_t n_nodes, double span) {
  if (y.size() < 2) throw Error(ErrorCode::kDegenerateData, "need at least two observations");
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double n = static_cast<double>(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0) || !std::isfinite(sd))
    throw Error(ErrorCode::kDegenerateData, "series has no spread; cannot place a grid");
  return Grid(*lo - span * sd, *hi + span * sd, n_nodes);
}

GridDensity diffuse_init(const Grid& grid, std::span<const double> y) {
  const GaussianState s = diffuse_state(y);
  return normalize(GridDensity::sampled(grid, [&](double x) {
    const double d = x - s.mean;
    return std::exp(-0.5 * d * d / s.var);
  }));
}

NgFilterOutput ng_filter(std::span<const double> y, const NgModel& m, const GridDensity& init,
                         ConvolutionMethod method) {
  NgFilterOutput out;
  out.predicted.reserve(y.size());
  out.filtered.reserve(y.size());
  out.log_evidence.reserve(y.size());
  out.loglik = run_filter(y, m, init, method, out.clipped_mass,
                          [&out](GridDensity&& pred, const GridDensity& filt, double log_ev) {
                            out.predicted.push_back(std::move(pred));
                            out.filtered.push_back(filt);
                            out.log_evidence.push_back(log_ev);
                          });
  return out;
}

double ng_loglik(std::span<const double> y, const NgModel& m, const GridDensity& init,
                 ConvolutionMethod method) {
  double clipped = 0.0;
  return run_filter(y, m, init, method, clipped, [](GridDensity&&, const GridDensity&, double) {});
}

std::vector<GridDensity> ng_smooth(const NgFilterOutput& run, const NgModel& m) {
  const std::size_t count = run.filtered.size();
  if (count == 0 || run.predicted.size() != count)
    throw Error(ErrorCode::kLengthMismatch, "smoother needs a complete filter run");
  const TransitionKernel kernel(m.sys_noise, m.grid);
  const Grid& grid = m.grid;
  const std::size_t n = grid.size();
  const double delta = kernel.delta_weight();

  std::vector<GridDensity> smoothed;
  smoothed.reserve(count);
  smoothed.push_back(run.filtered.back());

  std::vector<double> spread;
  if (run.filtered.front().has_atom() && delta < 1.0)
    spread = kernel.translated_density(run.filtered.front().atom_location());

  std::vector<double> ratio(n), backward(n);
  for (std::size_t k = count - 1; k-- > 0;) {
    const GridDensity& next_pred = run.predicted[k + 1];
    const GridDensity& next_smooth = smoothed.back();
    const GridDensity& filt = run.filtered[k];
    const auto p = next_pred.values();
    const auto s = next_smooth.values();
    for (std::size_t j = 0; j < n; ++j)
      ratio[j] = p[j] < kRatioCutoff ? 0.0 : s[j] / std::max(p[j], kRatioFloor);

    kernel.correlate_nodes(ratio, backward);
    const auto f = filt.values();
    std::vector<double> values(n);
    for (std::size_t j = 0; j < n; ++j) values[j] = f[j] * (backward[j] + delta * ratio[j]);

    double atom = 0.0;
    if (filt.has_atom()) {
      const double atom_ratio =
          next_pred.atom_weight() < kRatioCutoff
              ? 0.0
              : next_smooth.atom_weight() / std::max(next_pred.atom_weight(), kRatioFloor);
      double through_continuous = 0.0;
      if (!spread.empty()) {
        std::vector<double> weighted(n);
        for (std::size_t j = 0; j < n; ++j) weighted[j] = ratio[j] * spread[j];
        through_continuous = trapezoid_integral(grid, weighted);
      }
      atom = filt.atom_weight() * (delta * atom_ratio + through_continuous);
    }

    const bool finite = std::isfinite(atom) &&
                        std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
    if (!finite)
      throw Error(ErrorCode::kNumericalBlowup, "smoother ratio overflowed; widen the grid");
    // Only the shape matters: rescale before constructing to keep the atom
    // weight inside [0, 1].
    const double mass = trapezoid_integral(grid, values) + atom;
    if (!(mass > 0.0) || !std::isfinite(mass))
      throw Error(ErrorCode::kNumericalBlowup, "smoothed density vanished; widen the grid");
    for (double& v : values) v /= mass;
    smoothed.push_back(
        normalize(GridDensity(grid, std::move(values), std::min(1.0, atom / mass), filt.atom_location())));
  }
  std::reverse(smoothed.begin(), smoothed.end());
  return smoothed;
}

NgRunResult ng_run(std::span<const double> y, const NgModel& m, const GridDensity& init) {
  NgFilterOutput filt = ng_filter(y, m, init, ConvolutionMethod::kDirect);
  NgRunResult out;
  out.smoothed = ng_smooth(filt, m);
  out.predicted = std::move(filt.predicted);
  out.filtered = std::move(filt.filtered);
  out.loglik = filt.loglik;
  out.clipped_mass = filt.clipped_mass;
  return out;
}

std::vector<double> PosteriorBands::median() const {
  std::vector<double> out;
  out.reserve(bands.size());
  for (const auto& row : bands) out.push_back(row[3]);
  return out;
}

PosteriorBands posterior_bands(std::span<const GridDensity> smoothed) {
  PosteriorBands out;
  out.bands.reserve(smoothed.size());
  for (const auto& d : smoothed) {
    std::array<double, 7> row{};
    for (std::size_t k = 0; k < kBandLevels.size(); ++k) row[k] = percentile(d, kBandLevels[k]);
    out.bands.push_back(row);
  }
  return out;
}

}  // namespace ngtrend
