#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace ngtrend {

// Symmetric system-noise families. Parameter names follow the usual
// conventions: `var` is a variance, `tau2` the Pearson dispersion and `tau`
// the generalized-Laplace rate in C*exp(-tau*|x|^b).

struct Gaussian {
  double var = 1.0;
};

/// C / (x^2 + tau2)^b with b > 1/2. Cauchy at b = 1, Student-t(k) at
/// b = (k+1)/2 with tau2 = k.
struct PearsonVII {
  double b = 1.0;
  double tau2 = 1.0;
};

/// C * exp(-tau * |x|^b) with b > 0. Laplace at b = 1, N(0, 1/(2 tau)) at b = 2.
struct GeneralizedLaplace {
  double b = 1.0;
  double tau = 1.0;
};

struct Uniform {
  double lo = -1.0;
  double hi = 1.0;
};

/// Point mass. Contributes an atom, never a density value.
struct Delta {
  double loc = 0.0;
};

using NoiseComponent = std::variant<Gaussian, Uniform, Delta>;

/// alpha * f + (1 - alpha) * g.
struct Mixture {
  double alpha = 0.5;
  NoiseComponent f = Gaussian{};
  NoiseComponent g = Gaussian{};
};

using NoiseModel = std::variant<Gaussian, PearsonVII, GeneralizedLaplace, Mixture>;

struct AtomMass {
  double weight = 0.0;
  double location = 0.0;
};

/// Smallest admissible Pearson shape.
inline constexpr double kPearsonMinShape = 0.5 + 1e-6;

/// Throws Error(kInvalidParameter) when a parameter is outside its domain.
void validate(const NoiseModel& m);

/// True for the plain families and the four mixture pairings
/// G+G, G+U, Delta+U, Delta+G with any Delta at 0. Other valid models work
/// but are experimental.
bool is_certified(const NoiseModel& m);

/// Density of the continuous part at x. Delta components contribute zero.
double density(const NoiseModel& m, double x);

/// Weight and location of the (at most one) Delta component.
AtomMass atom_mass(const NoiseModel& m);

/// -d log p(x) / dx of the continuous part. Throws kUndefinedAt at points
/// where the density is zero or not differentiable.
double influence(const NoiseModel& m, double x);

/// Mass of the continuous part on (-inf, x]. Equals 1 - atom weight as x -> inf.
double continuous_cdf(const NoiseModel& m, double x);

/// Mass of the continuous part on (x, inf). Accurate in the upper tail.
double continuous_sf(const NoiseModel& m, double x);

/// i.i.d. draws, bit-reproducible for a given seed on any platform.
std::vector<double> sample(const NoiseModel& m, std::uint64_t seed, std::size_t count);

/// A dispersion proxy: the standard deviation when it exists, otherwise a
/// width scale (tau for Pearson, rate^(-1/b) for generalized Laplace).
double scale_proxy(const NoiseModel& m);

std::string describe(const NoiseModel& m);

nlohmann::json to_json(const NoiseModel& m);
NoiseModel noise_model_from_json(const nlohmann::json& j);

}  // namespace ngtrend
