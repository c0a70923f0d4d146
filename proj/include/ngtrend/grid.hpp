#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "ngtrend/noise_model.hpp"

namespace ngtrend {

/// Uniform 1-D mesh. Node i sits at lo + i*h with h = (hi - lo) / (n - 1).
class Grid {
 public:
  Grid(double lo, double hi, std::size_t n_nodes);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  double node(std::size_t i) const noexcept {
    return i + 1 == n_ ? hi_ : lo_ + static_cast<double>(i) * h_;
  }
  std::vector<double> nodes() const;

  bool operator==(const Grid&) const = default;

 private:
  double lo_;
  double hi_;
  std::size_t n_;
  double h_;
};

/// Continuous piecewise-linear density given by its nodal values, plus an
/// optional point mass. Values are in 1/state-unit.
class GridDensity {
 public:
  GridDensity(Grid grid, std::vector<double> values, double atom_weight = 0.0,
              double atom_location = 0.0);

  /// Nodal samples of f; not normalized.
  template <class F>
  static GridDensity sampled(const Grid& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.node(i));
    return GridDensity(grid, std::move(v));
  }

  /// All mass in one atom.
  static GridDensity point_mass(const Grid& grid, double location);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double atom_weight() const noexcept { return atom_weight_; }
  double atom_location() const noexcept { return atom_location_; }
  bool has_atom() const noexcept { return atom_weight_ > 0.0; }

  double mean() const;
  double variance() const;

 private:
  Grid grid_;
  std::vector<double> values_;
  double atom_weight_;
  double atom_location_;
};

/// sum_i h*(v_i + v_{i+1})/2 + atom weight. Throws kNotFinite on NaN/inf.
double trapezoid_integral(const GridDensity& d);
double trapezoid_integral(const Grid& grid, std::span<const double> values);

/// Rescales values and atom by one positive constant so the total mass is 1.
/// A density whose mass is already within 1e-12 of 1 is returned unchanged,
/// which makes the operation idempotent. Throws kZeroMass.
GridDensity normalize(const GridDensity& d);

enum class ConvolutionMethod { kDirect, kFft };

/// The system-noise kernel discretized on a grid.
///
/// For a piecewise-linear density sum_j v_j phi_j(x) (phi_j the hat function
/// at node j), the convolution with the continuous part q evaluated at node i
/// is exactly sum_j v_j K[i-j] with K[m] = int phi_0(m h - t) q(t) dt. These
/// hat weights come from the kernel's CDF, so very peaked kernels (much
/// narrower than h) and kernels with kinks keep their mass. Kernels the grid
/// resolves use plain samples h*q(mh) instead, with a smooth blend between
/// the two regimes. A Delta(0) component contributes the identity with its
/// weight.
class TransitionKernel {
 public:
  TransitionKernel(const NoiseModel& model, const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }
  const NoiseModel& model() const noexcept { return model_; }
  double delta_weight() const noexcept { return delta_weight_; }

  /// K[m] for m in [-(n-1), n-1], stored at index m + n - 1.
  std::span<const double> weights() const noexcept { return weights_; }
  double weight(std::ptrdiff_t m) const;

  /// Hat-weighted mass of the continuous part around an arbitrary offset c:
  /// int phi_0(c - t) q(t) dt.
  double hat_mass(double offset) const;

  /// Nodal density of the continuous part translated to `location`. Sampled
  /// pointwise when the grid resolves it, otherwise mass-lumped (hat_mass/h).
  std::vector<double> translated_density(double location) const;

  /// Density of X + V for X ~ d. The result is normalized; mass pushed out of
  /// the grid is added to *clipped when given.
  GridDensity apply(const GridDensity& d, ConvolutionMethod method = ConvolutionMethod::kDirect,
                    double* clipped = nullptr) const;

  /// As above with translated_density(d.atom_location()) supplied by the
  /// caller, so recursions with a fixed atom compute it once.
  GridDensity apply(const GridDensity& d, ConvolutionMethod method, double* clipped,
                    std::span<const double> atom_spread) const;

  /// out_i = sum_j K[i-j] r_j over the continuous part only.
  void convolve_nodes(std::span<const double> r, std::span<double> out,
                      ConvolutionMethod method) const;

  /// out_i = sum_j K[j-i] r_j (adjoint of convolve_nodes), direct summation.
  void correlate_nodes(std::span<const double> r, std::span<double> out) const;

 private:
  struct FftState;

  void blend_point_samples();

  Grid grid_;
  NoiseModel model_;
  double delta_weight_ = 0.0;
  double continuous_mass_ = 1.0;
  std::vector<double> weights_;
  std::vector<double> reversed_;
  std::shared_ptr<const FftState> fft_;
};

/// Convenience wrapper: TransitionKernel(kernel, d.grid()).apply(d).
GridDensity convolve(const GridDensity& d, const NoiseModel& kernel);

struct BayesUpdate {
  GridDensity posterior;
  double evidence;
};

/// posterior ∝ prior * likelihood. The prior atom is reweighted by the
/// likelihood at its location: `atom_likelihood` when given, else the linear
/// interpolant of the nodal likelihood. Throws kZeroEvidence.
BayesUpdate pointwise_bayes(const GridDensity& prior, std::span<const double> likelihood_at_nodes);
BayesUpdate pointwise_bayes(const GridDensity& prior, std::span<const double> likelihood_at_nodes,
                            double atom_likelihood);

/// x with CDF(x) = q. Inside a cell the CDF is inverted linearly; the atom
/// is a jump, and any q inside the jump maps to the atom location.
double percentile(const GridDensity& d, double q);

}  // namespace ngtrend
