#include <cmath>
#include <numeric>

#include "doctest.h"
#include "ngtrend/error.hpp"
#include "ngtrend/kalman.hpp"
#include "ngtrend/mle_fit.hpp"
#include "ngtrend/synthetic.hpp"

using namespace ngtrend;

TEST_CASE("default series layout") {
  const JumpSpec spec = default_jump_spec();
  const SyntheticSeries s = generate(spec);
  REQUIRE(s.y.size() == 500);
  CHECK(s.truth[0] == 0.0);
  CHECK(s.truth[98] == 0.0);
  CHECK(s.truth[99] == 2.0);    // index 100 (1-based) starts segment 2
  CHECK(s.truth[249] == -1.0);  // index 250
  CHECK(s.truth[349] == 1.0);   // index 350
  CHECK(s.truth[499] == 1.0);   // n belongs to the last segment
}

TEST_CASE("per-segment statistics") {
  const JumpSpec spec = default_jump_spec();
  const SyntheticSeries s = generate(spec);
  for (std::size_t k = 0; k + 1 < spec.segment_bounds.size(); ++k) {
    const std::size_t lo = spec.segment_bounds[k] - 1;
    const std::size_t hi = k + 2 == spec.segment_bounds.size() ? spec.n : spec.segment_bounds[k + 1] - 1;
    const double len = static_cast<double>(hi - lo);
    const double mean = std::accumulate(s.y.begin() + lo, s.y.begin() + hi, 0.0) / len;
    double ss = 0.0;
    for (std::size_t i = lo; i < hi; ++i) ss += (s.y[i] - mean) * (s.y[i] - mean);
    CHECK(std::abs(mean - spec.segment_levels[k]) < 3.0 / std::sqrt(len));
    // The chi-square band of +-0.25 holds for segments of 150 or more.
    if (len >= 150) CHECK(std::abs(ss / (len - 1) - 1.0) < 0.25);
  }
}

TEST_CASE("noiseless limit reproduces the step function") {
  JumpSpec spec = default_jump_spec();
  spec.obs_sigma2 = 1e-12;
  const SyntheticSeries s = generate(spec);
  for (std::size_t i = 0; i < s.y.size(); ++i) CHECK(std::abs(s.y[i] - s.truth[i]) < 1e-5);
}

TEST_CASE("determinism") {
  const JumpSpec spec = default_jump_spec();
  CHECK(generate(spec).y == generate(spec).y);
  JumpSpec other = spec;
  other.seed = 43;
  CHECK(generate(other).y != generate(spec).y);
}

TEST_CASE("rescaled layout for other lengths") {
  const JumpSpec spec = default_jump_spec(1000);
  CHECK(spec.segment_bounds == std::vector<std::size_t>{1, 200, 500, 700, 1000});
  CHECK_NOTHROW(generate(default_jump_spec(10)));
  CHECK(generate(default_jump_spec(10)).y.size() == 10);
  CHECK(default_jump_spec(3).segment_levels.size() == 1);
}

TEST_CASE("invalid specs") {
  auto code = [](JumpSpec spec) {
    try {
      generate(spec);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kZeroMass;
  };
  JumpSpec a = default_jump_spec();
  a.segment_bounds = {1, 250, 100, 500};
  a.segment_levels = {0, 1, 2};
  CHECK(code(a) == ErrorCode::kInvalidSpec);
  JumpSpec b = default_jump_spec();
  b.segment_levels = {0, 1};
  CHECK(code(b) == ErrorCode::kInvalidSpec);
  JumpSpec c = default_jump_spec();
  c.obs_sigma2 = 0.0;
  CHECK(code(c) == ErrorCode::kInvalidSpec);
  JumpSpec d = default_jump_spec();
  d.segment_bounds.back() = 499;
  CHECK(code(d) == ErrorCode::kInvalidSpec);
}

TEST_CASE("single flat segment gives a tiny trend variance") {
  JumpSpec spec;
  spec.segment_bounds = {1, 500};
  spec.segment_levels = {0.0};
  const SyntheticSeries s = generate(spec);
  FitSpec fs;
  fs.model = Gaussian{0.01};
  const FitResult r = fit(s.y, fs);
  CHECK(std::get<Gaussian>(r.model).var < 1e-3);
}

TEST_CASE("simulate_trend follows the model") {
  const auto s = simulate_trend(2000, Gaussian{0.04}, 1e-12, 5);
  double ss = 0.0;
  for (std::size_t i = 1; i < s.truth.size(); ++i) ss += std::pow(s.truth[i] - s.truth[i - 1], 2);
  CHECK(ss / 1999.0 == doctest::Approx(0.04).epsilon(0.1));
  CHECK(std::abs(s.y[10] - s.truth[10]) < 1e-5);
}
