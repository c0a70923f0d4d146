#include "ngtrend/synthetic.hpp"

#include <cmath>

#include "ngtrend/error.hpp"
#include "ngtrend/rng.hpp"

namespace ngtrend {

namespace {

[[noreturn]] void invalid_spec(const std::string& what) {
  throw Error(ErrorCode::kInvalidSpec, what);
}

// Separate stream for the system noise so both sequences are independent.
constexpr std::uint64_t kSystemStreamSalt = 0x9E3779B97F4A7C15ull;

}  // namespace

JumpSpec default_jump_spec(std::size_t n) {
  JumpSpec spec;
  if (n == spec.n) return spec;
  spec.n = n;
  std::vector<std::size_t> bounds{1};
  for (std::size_t b : {100u, 250u, 350u}) {
    const auto scaled = static_cast<std::size_t>(std::lround(static_cast<double>(b) * n / 500.0));
    if (scaled <= bounds.back() || scaled >= n) {
      spec.segment_bounds = {1, n};
      spec.segment_levels = {0.0};
      return spec;
    }
    bounds.push_back(scaled);
  }
  bounds.push_back(n);
  spec.segment_bounds = std::move(bounds);
  return spec;
}

void validate(const JumpSpec& spec) {
  if (spec.n == 0) invalid_spec("series length must be positive");
  const auto& b = spec.segment_bounds;
  if (b.size() < 2) invalid_spec("need at least two segment bounds");
  if (b.front() != 1 || b.back() != spec.n) invalid_spec("bounds must start at 1 and end at n");
  for (std::size_t i = 1; i < b.size(); ++i)
    if (!(b[i] > b[i - 1]) && !(spec.n == 1 && b.size() == 2))
      invalid_spec("bounds must be strictly increasing");
  if (spec.segment_levels.size() != b.size() - 1)
    invalid_spec("need one level per segment");
  for (double level : spec.segment_levels)
    if (!std::isfinite(level)) invalid_spec("levels must be finite");
  if (!std::isfinite(spec.obs_sigma2) || !(spec.obs_sigma2 > 0.0))
    invalid_spec("observation variance must be > 0");
}

SyntheticSeries generate(const JumpSpec& spec) {
  validate(spec);
  SyntheticSeries out;
  out.y.reserve(spec.n);
  out.truth.reserve(spec.n);
  PortableRng rng(spec.seed);
  const double sd = std::sqrt(spec.obs_sigma2);
  std::size_t segment = 0;
  for (std::size_t i = 1; i <= spec.n; ++i) {
    while (segment + 2 < spec.segment_bounds.size() && i >= spec.segment_bounds[segment + 1])
      ++segment;
    const double level = spec.segment_levels[segment];
    out.truth.push_back(level);
    out.y.push_back(level + sd * rng.standard_normal());
  }
  return out;
}

SyntheticSeries simulate_trend(std::size_t n, const NoiseModel& sys_noise, double obs_sigma2,
                               std::uint64_t seed, double start) {
  if (!std::isfinite(obs_sigma2) || !(obs_sigma2 > 0.0))
    invalid_spec("observation variance must be > 0");
  const std::vector<double> steps = sample(sys_noise, seed ^ kSystemStreamSalt, n);
  PortableRng rng(seed);
  const double sd = std::sqrt(obs_sigma2);
  SyntheticSeries out;
  out.y.reserve(n);
  out.truth.reserve(n);
  double level = start;
  for (std::size_t i = 0; i < n; ++i) {
    level += steps[i];
    out.truth.push_back(level);
    out.y.push_back(level + sd * rng.standard_normal());
  }
  return out;
}

}  // namespace ngtrend
