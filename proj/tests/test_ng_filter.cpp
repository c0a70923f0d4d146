#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "ngtrend/error.hpp"
#include "ngtrend/kalman.hpp"
#include "ngtrend/ng_filter.hpp"
#include "ngtrend/rng.hpp"
#include "ngtrend/synthetic.hpp"

using namespace ngtrend;

namespace {

Grid marginal_grid(const std::vector<double>& y, double span, std::size_t nodes) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (y.size() - 1));
  return Grid(mean - span * sd, mean + span * sd, nodes);
}

GridDensity flat(const Grid& g) {
  return normalize(GridDensity::sampled(g, [](double) { return 1.0; }));
}

double sup_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("Gaussian system noise reproduces the Kalman filter and smoother") {
  PortableRng draw(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const double tau2 = std::exp(std::log(1e-3) + draw.uniform() * std::log(1e3));  // 1e-3 .. 1
    const double sigma2 = 0.3 + 1.5 * draw.uniform();
    const auto sim = simulate_trend(200, Gaussian{tau2}, sigma2, 100 + trial);
    const std::vector<double>& y = sim.y;
    const Grid grid = marginal_grid(y, 8.0, 801);
    const GaussianState init_state = diffuse_state(y);
    const GridDensity init = normalize(GridDensity::sampled(grid, [&](double x) {
      return std::exp(-0.5 * (x - init_state.mean) * (x - init_state.mean) / init_state.var);
    }));
    const NgModel model{Gaussian{tau2}, sigma2, grid};
    const NgRunResult run = ng_run(y, model, init);

    const TrendParams p{sigma2, tau2};
    const KalmanOutput k = kalman_filter(y, p, init_state);
    const auto ks = kalman_smoother(k.filtered, k.predicted, p);

    CAPTURE(trial);
    CAPTURE(tau2);
    CHECK(std::abs(run.loglik - k.loglik) <= 0.05);
    double filt_err = 0.0, smooth_err = 0.0;
    for (std::size_t n = 0; n < y.size(); ++n) {
      filt_err = std::max(filt_err, std::abs(run.filtered[n].mean() - k.filtered[n].mean));
      smooth_err = std::max(smooth_err, std::abs(run.smoothed[n].mean() - ks[n].mean));
      CHECK(run.smoothed[n].variance() <= run.filtered[n].variance() + 1e-9);
    }
    CHECK(filt_err <= 1e-3);
    CHECK(smooth_err <= 2e-3);
  }
}

TEST_CASE("no system noise") {
  const auto y = generate(default_jump_spec(60)).y;
  const Grid grid = default_grid(y, 300);
  const NgModel model{Mixture{1.0, Delta{0.0}, Gaussian{4.0}}, 1.0, grid};
  const NgRunResult run = ng_run(y, model, diffuse_init(grid, y));
  for (std::size_t n = 1; n < y.size(); ++n)
    CHECK(sup_diff(run.predicted[n].values(), run.filtered[n - 1].values()) == 0.0);
  // A rigid trend has the same smoothed marginal at every step.
  for (std::size_t n = 0; n < y.size(); ++n)
    CHECK(sup_diff(run.smoothed[n].values(), run.smoothed.back().values()) <= 1e-9);
}

TEST_CASE("filtered median locates a step") {
  std::vector<double> y(100, 0.0);
  std::fill(y.begin() + 50, y.end(), 5.0);
  PortableRng rng(8);
  for (double& v : y) v += std::sqrt(0.1) * rng.standard_normal();

  // Oracle: exhaustive two-segment least squares.
  std::size_t best_split = 0;
  double best_sse = 1e300;
  for (std::size_t s = 1; s < y.size(); ++s) {
    const double m1 = std::accumulate(y.begin(), y.begin() + s, 0.0) / s;
    const double m2 = std::accumulate(y.begin() + s, y.end(), 0.0) / (y.size() - s);
    double sse = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sse += std::pow(y[i] - (i < s ? m1 : m2), 2);
    if (sse < best_sse) best_sse = sse, best_split = s;
  }

  const Grid grid = default_grid(y, 800);
  const NgModel model{PearsonVII{0.75, 1e-8}, 0.1, grid};
  const NgFilterOutput out = ng_filter(y, model, diffuse_init(grid, y));
  std::size_t crossing = 0;
  for (std::size_t n = 0; n < y.size(); ++n) {
    if (percentile(out.filtered[n], 0.5) > 2.5) {
      crossing = n;
      break;
    }
  }
  CHECK(std::abs(static_cast<long>(crossing) - static_cast<long>(best_split)) <= 2);
}

TEST_CASE("run invariants on heavy-tailed noise") {
  const auto y = generate(default_jump_spec(120)).y;
  const Grid grid = default_grid(y, 400);
  for (const NoiseModel& sys : {NoiseModel{PearsonVII{0.75, 1e-4}}, NoiseModel{GeneralizedLaplace{0.2, 10.0}},
                                NoiseModel{Mixture{0.98, Delta{0.0}, Gaussian{4.0}}}}) {
    const NgModel model{sys, 0.9, grid};
    const NgFilterOutput f = ng_filter(y, model, diffuse_init(grid, y));
    double sum = 0.0;
    for (double e : f.log_evidence) sum += e;
    CHECK(f.loglik == sum);
    const auto smoothed = ng_smooth(f, model);
    CHECK(std::ranges::equal(smoothed.back().values(), f.filtered.back().values()));
    CHECK(smoothed.back().atom_weight() == f.filtered.back().atom_weight());
    for (std::size_t n = 0; n < y.size(); ++n) {
      CHECK(trapezoid_integral(f.predicted[n]) == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(trapezoid_integral(f.filtered[n]) == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(trapezoid_integral(smoothed[n]) == doctest::Approx(1.0).epsilon(1e-6));
    }
    const PosteriorBands bands = posterior_bands(smoothed);
    for (const auto& row : bands.bands) CHECK(std::is_sorted(row.begin(), row.end()));
    // The FFT likelihood agrees with the stored direct run.
    CHECK(ng_loglik(y, model, diffuse_init(grid, y)) == doctest::Approx(f.loglik).epsilon(1e-8));
  }
}

TEST_CASE("reversal symmetry of the Gaussian smoother") {
  const auto sim = simulate_trend(80, Gaussian{0.05}, 0.5, 77);
  std::vector<double> rev(sim.y.rbegin(), sim.y.rend());
  const Grid grid = marginal_grid(sim.y, 6.0, 601);
  const NgModel model{Gaussian{0.05}, 0.5, grid};
  const NgRunResult fwd = ng_run(sim.y, model, flat(grid));
  const NgRunResult bwd = ng_run(rev, model, flat(grid));
  double err = 0.0;
  for (std::size_t n = 0; n < sim.y.size(); ++n)
    err = std::max(err, std::abs(fwd.smoothed[n].mean() - bwd.smoothed[sim.y.size() - 1 - n].mean()));
  CHECK(err <= 1e-3);
}

TEST_CASE("posterior bands of a standard Gaussian") {
  const Grid grid(-8.0, 8.0, 1601);
  const GridDensity g = normalize(GridDensity::sampled(grid, [](double x) { return std::exp(-0.5 * x * x); }));
  const std::vector<GridDensity> smoothed(3, g);
  const PosteriorBands b = posterior_bands(smoothed);
  const double expect[7] = {-3, -2, -1, 0, 1, 2, 3};
  for (const auto& row : b.bands)
    for (int k = 0; k < 7; ++k) CHECK(std::abs(row[k] - expect[k]) < 2e-2);
  CHECK(b.median().size() == 3);
}

TEST_CASE("observation far outside the grid") {
  std::vector<double> y{0.0, 0.1, -0.1, 0.2, 1e6};
  const Grid grid(-5.0, 5.0, 200);
  const NgModel model{Gaussian{0.01}, 1e-4, grid};
  try {
    ng_filter(y, model, diffuse_init(grid, y));
    FAIL("expected ZeroEvidence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kZeroEvidence);
  }
}

TEST_CASE("default grid") {
  const std::vector<double> y{1.0, 2.0, 3.0};
  const Grid g = default_grid(y);
  CHECK(g.size() == 800);
  CHECK(g.lo() == doctest::Approx(1.0 - 4.0));
  CHECK(g.hi() == doctest::Approx(3.0 + 4.0));
  const std::vector<double> flat_y(5, 2.0);
  CHECK_THROWS_AS(default_grid(flat_y), Error);
}
