#include "ngtrend/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <complex>
#include <mutex>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "ngtrend/error.hpp"

namespace ngtrend {

namespace {

constexpr double kNormalizeSlack = 1e-12;
constexpr int kGradedOctaves = 64;

// FFTW's planner is not re-entrant.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t fft_friendly_size(std::size_t at_least) {
  for (std::size_t n = at_least;; ++n) {
    std::size_t r = n;
    for (std::size_t p : {2u, 3u, 5u, 7u})
      while (r % p == 0) r /= p;
    if (r == 1) return n;
  }
}

template <class F>
double gauss8(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 8>::integrate(f, a, b);
}

// int_0^L g(s) ds where g may vary sharply near s = 0: octave subdivision
// toward zero, each piece by 8-point Gauss-Legendre.
template <class G>
double graded_from_zero(G&& g, double length) {
  double total = 0.0;
  double hi = length;
  for (int k = 0; k < kGradedOctaves; ++k) {
    const double lo = 0.5 * hi;
    total += gauss8(g, lo, hi);
    hi = lo;
  }
  return total + hi * g(0.5 * hi);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::vector<double> kink_points(const NoiseModel& m) {
  std::vector<double> kinks;
  if (const auto* mx = std::get_if<Mixture>(&m)) {
    for (const auto* c : {&mx->f, &mx->g}) {
      if (const auto* u = std::get_if<Uniform>(c)) {
        kinks.push_back(u->lo);
        kinks.push_back(u->hi);
      }
    }
  }
  std::sort(kinks.begin(), kinks.end());
  return kinks;
}

bool continuous_part_symmetric(const NoiseModel& m) {
  const auto* mx = std::get_if<Mixture>(&m);
  if (mx == nullptr) return true;
  for (const auto* c : {&mx->f, &mx->g}) {
    if (const auto* u = std::get_if<Uniform>(c); u != nullptr && u->lo != -u->hi) return false;
  }
  return true;
}

// Integrals of the continuous CDF F (left of the peak at 0) and survival S
// (right of it), weighted by linear functions. Splits at 0 and at kinks so
// every quadrature piece sees a smooth integrand.
class TailIntegrator {
 public:
  explicit TailIntegrator(const NoiseModel& m) : model_(m), kinks_(kink_points(m)) {}

  double cdf(double x) const { return continuous_cdf(model_, x); }
  double sf(double x) const { return continuous_sf(model_, x); }

  // int_a^b F(t) dt with b <= 0.
  double integral_cdf(double a, double b) const {
    return piecewise(a, b, [this](double lo, double hi) {
      if (hi == 0.0) return graded_from_zero([this](double s) { return cdf(-s); }, -lo);
      return gauss8([this](double t) { return cdf(t); }, lo, hi);
    });
  }

  // int_a^b S(t) dt with a >= 0.
  double integral_sf(double a, double b) const {
    return piecewise(a, b, [this](double lo, double hi) {
      if (lo == 0.0) return graded_from_zero([this](double s) { return sf(s); }, hi);
      return gauss8([this](double t) { return sf(t); }, lo, hi);
    });
  }

  // int_a^b w(t) q(t) dt with w linear, w(a) = wa, w(b) = wb.
  double weighted_mass(double a, double b, double wa, double wb) const {
    if (!(b > a)) return 0.0;
    if (a < 0.0 && b > 0.0) {
      const double w0 = wa + (wb - wa) * (-a) / (b - a);
      return weighted_mass(a, 0.0, wa, w0) + weighted_mass(0.0, b, w0, wb);
    }
    const double slope = (wb - wa) / (b - a);
    if (b <= 0.0) return wb * cdf(b) - wa * cdf(a) - slope * integral_cdf(a, b);
    return wa * sf(a) - wb * sf(b) + slope * integral_sf(a, b);
  }

 private:
  template <class Piece>
  double piecewise(double a, double b, Piece&& piece) const {
    double total = 0.0;
    double lo = a;
    for (double k : kinks_) {
      if (k > lo && k < b) {
        total += piece(lo, k);
        lo = k;
      }
    }
    return total + piece(lo, b);
  }

  const NoiseModel& model_;
  std::vector<double> kinks_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Grid / GridDensity

Grid::Grid(double lo, double hi, std::size_t n_nodes) : lo_(lo), hi_(hi), n_(n_nodes) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi) || n_nodes < 2) {
    std::ostringstream os;
    os << "grid needs finite lo < hi and at least 2 nodes (got [" << lo << ", " << hi << "], "
       << n_nodes << ")";
    throw Error(ErrorCode::kInvalidParameter, os.str());
  }
  h_ = (hi - lo) / static_cast<double>(n_nodes - 1);
}

std::vector<double> Grid::nodes() const {
  std::vector<double> x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[i] = node(i);
  return x;
}

GridDensity::GridDensity(Grid grid, std::vector<double> values, double atom_weight,
                         double atom_location)
    : grid_(grid),
      values_(std::move(values)),
      atom_weight_(atom_weight),
      atom_location_(atom_weight > 0.0 ? atom_location : 0.0) {
  if (values_.size() != grid_.size())
    throw Error(ErrorCode::kLengthMismatch, "density values must match the grid node count");
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNotFinite, "density value is not finite");
    if (v < 0.0) throw Error(ErrorCode::kInvalidParameter, "density values must be nonnegative");
  }
  if (!std::isfinite(atom_weight) || atom_weight < 0.0 || atom_weight > 1.0 + kNormalizeSlack)
    throw Error(ErrorCode::kInvalidParameter, "atom weight must lie in [0, 1]");
  if (atom_weight > 0.0 && !(atom_location >= grid_.lo() && atom_location <= grid_.hi()))
    throw Error(ErrorCode::kInvalidParameter, "atom location must lie inside the grid");
}

GridDensity GridDensity::point_mass(const Grid& grid, double location) {
  return GridDensity(grid, std::vector<double>(grid.size(), 0.0), 1.0, location);
}

double GridDensity::mean() const {
  const double h = grid_.spacing();
  double mass = atom_weight_;
  double first = atom_weight_ * atom_location_;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double w = (i == 0 || i + 1 == values_.size()) ? 0.5 * h : h;
    mass += w * values_[i];
    first += w * values_[i] * grid_.node(i);
  }
  return first / mass;
}

double GridDensity::variance() const {
  const double mu = mean();
  const double h = grid_.spacing();
  double mass = atom_weight_;
  double second = atom_weight_ * (atom_location_ - mu) * (atom_location_ - mu);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double w = (i == 0 || i + 1 == values_.size()) ? 0.5 * h : h;
    const double dx = grid_.node(i) - mu;
    mass += w * values_[i];
    second += w * values_[i] * dx * dx;
  }
  return second / mass;
}

double trapezoid_integral(const Grid& grid, std::span<const double> values) {
  double interior = 0.0;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) interior += values[i];
  const double total =
      grid.spacing() * (interior + 0.5 * (values.front() + values.back()));
  if (!std::isfinite(total)) throw Error(ErrorCode::kNotFinite, "integral is not finite");
  return total;
}

double trapezoid_integral(const GridDensity& d) {
  return trapezoid_integral(d.grid(), d.values()) + d.atom_weight();
}

GridDensity normalize(const GridDensity& d) {
  double total = 0.0;
  try {
    total = trapezoid_integral(d);
  } catch (const Error&) {
    throw Error(ErrorCode::kZeroMass, "density has non-finite values");
  }
  if (!(total > 0.0) || !std::isfinite(total))
    throw Error(ErrorCode::kZeroMass, "density has zero total mass");
  if (std::abs(total - 1.0) <= kNormalizeSlack) return d;
  const double scale = 1.0 / total;
  std::vector<double> v(d.values().begin(), d.values().end());
  for (double& x : v) x *= scale;
  return GridDensity(d.grid(), std::move(v), std::min(1.0, d.atom_weight() * scale),
                     d.atom_location());
}

// ---------------------------------------------------------------------------
// TransitionKernel

struct TransitionKernel::FftState {
  std::size_t length = 0;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::vector<std::complex<double>> kernel_spectrum;

  FftState() = default;
  FftState(const FftState&) = delete;
  FftState& operator=(const FftState&) = delete;
  ~FftState() {
    std::lock_guard lock(fftw_planner_mutex());
    if (forward != nullptr) fftw_destroy_plan(forward);
    if (backward != nullptr) fftw_destroy_plan(backward);
  }
};

TransitionKernel::TransitionKernel(const NoiseModel& model, const Grid& grid)
    : grid_(grid), model_(model) {
  validate(model_);
  const AtomMass atom = atom_mass(model_);
  if (atom.weight > 0.0 && atom.location != 0.0)
    throw Error(ErrorCode::kUnsupportedKernel,
                "a Delta component must sit at 0 to act on a grid density");
  delta_weight_ = atom.weight;
  continuous_mass_ = 1.0 - atom.weight;

  const std::size_t n = grid_.size();
  const double h = grid_.spacing();
  weights_.assign(2 * n - 1, 0.0);
  if (continuous_mass_ > 0.0) {
    const TailIntegrator tails(model_);
    // cell_lower[j] = int over [-(j+1)h, -j h] of F; cell_upper likewise for S.
    std::vector<double> cell_lower(n), cell_upper(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = -static_cast<double>(j + 1) * h;
      cell_lower[j] = tails.integral_cdf(a, a + h);
    }
    const bool symmetric = continuous_part_symmetric(model_);
    if (symmetric) {
      cell_upper = cell_lower;
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        const double a = static_cast<double>(j) * h;
        cell_upper[j] = tails.integral_sf(a, a + h);
      }
    }
    const std::ptrdiff_t mid = static_cast<std::ptrdiff_t>(n) - 1;
    weights_[mid] = tails.cdf(0.0) - cell_lower[0] / h + tails.sf(0.0) - cell_upper[0] / h;
    // K[-m] = (cell_lower[m-1] - cell_lower[m]) / h, mirrored for K[m].
    for (std::size_t m = 1; m < n; ++m) {
      weights_[mid - static_cast<std::ptrdiff_t>(m)] =
          std::max(0.0, (cell_lower[m - 1] - cell_lower[m]) / h);
      weights_[mid + static_cast<std::ptrdiff_t>(m)] =
          std::max(0.0, (cell_upper[m - 1] - cell_upper[m]) / h);
    }
    weights_[mid] = std::max(0.0, weights_[mid]);
    blend_point_samples();
  }
  reversed_.assign(weights_.rbegin(), weights_.rend());

  auto state = std::make_shared<FftState>();
  state->length = fft_friendly_size(3 * n - 2);
  const std::size_t spectrum = state->length / 2 + 1;
  std::vector<double> real(state->length, 0.0);
  state->kernel_spectrum.assign(spectrum, {0.0, 0.0});
  {
    std::lock_guard lock(fftw_planner_mutex());
    auto* cplx = reinterpret_cast<fftw_complex*>(state->kernel_spectrum.data());
    const int len = static_cast<int>(state->length);
    state->forward = fftw_plan_dft_r2c_1d(len, real.data(), cplx, FFTW_ESTIMATE | FFTW_UNALIGNED);
    state->backward = fftw_plan_dft_c2r_1d(len, cplx, real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  std::copy(weights_.begin(), weights_.end(), real.begin());
  fftw_execute_dft_r2c(state->forward, real.data(),
                       reinterpret_cast<fftw_complex*>(state->kernel_spectrum.data()));
  fft_ = std::move(state);
}

// The hat weights convolve the piecewise-linear interpolant exactly, and the
// interpolant carries h^2/6 more variance than its nodal samples; for a kernel
// the grid resolves that surplus would be added at every step. Plain samples
// h*q(mh) have no such bias but lose mass when q is narrower than h. Use the
// samples where they capture the mass and fade to the hat weights (smoothly in
// log mass error, so likelihoods stay continuous in the parameters) where they
// do not.
void TransitionKernel::blend_point_samples() {
  constexpr double kResolved = -8.0;    // log10 mass error: pure samples
  constexpr double kUnresolved = -4.0;  // log10 mass error: pure hat weights
  const std::size_t n = grid_.size();
  const double h = grid_.spacing();
  const std::ptrdiff_t mid = static_cast<std::ptrdiff_t>(n) - 1;
  std::vector<double> point(weights_.size());
  for (std::ptrdiff_t m = -mid; m <= mid; ++m)
    point[static_cast<std::size_t>(m + mid)] = h * density(model_, static_cast<double>(m) * h);
  const double hat_total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  const double point_total = std::accumulate(point.begin(), point.end(), 0.0);
  if (!(hat_total > 0.0) || !(point_total > 0.0) || !std::isfinite(point_total)) return;
  const double err = std::abs(point_total - hat_total) / hat_total;
  const double t = std::clamp(
      (std::log10(std::max(err, 1e-300)) - kUnresolved) / (kResolved - kUnresolved), 0.0, 1.0);
  const double lambda = t * t * (3.0 - 2.0 * t);
  if (lambda == 0.0) return;
  const double scale = hat_total / point_total;
  for (std::size_t i = 0; i < weights_.size(); ++i)
    weights_[i] = lambda * scale * point[i] + (1.0 - lambda) * weights_[i];
}

double TransitionKernel::weight(std::ptrdiff_t m) const {
  const std::ptrdiff_t mid = static_cast<std::ptrdiff_t>(grid_.size()) - 1;
  if (m < -mid || m > mid) return 0.0;
  return weights_[static_cast<std::size_t>(m + mid)];
}

double TransitionKernel::hat_mass(double offset) const {
  if (continuous_mass_ <= 0.0) return 0.0;
  const TailIntegrator tails(model_);
  const double h = grid_.spacing();
  return tails.weighted_mass(offset - h, offset, 0.0, 1.0) +
         tails.weighted_mass(offset, offset + h, 1.0, 0.0);
}

std::vector<double> TransitionKernel::translated_density(double location) const {
  const std::size_t n = grid_.size();
  std::vector<double> out(n, 0.0);
  if (continuous_mass_ <= 0.0) return out;
  for (std::size_t i = 0; i < n; ++i) out[i] = density(model_, grid_.node(i) - location);
  const double sampled = trapezoid_integral(grid_, out);
  const double exact = continuous_cdf(model_, grid_.hi() - location) -
                       continuous_cdf(model_, grid_.lo() - location);
  if (std::abs(sampled - exact) <= 1e-6 * std::max(exact, 1e-300)) return out;
  const double h = grid_.spacing();
  for (std::size_t i = 0; i < n; ++i) out[i] = hat_mass(grid_.node(i) - location) / h;
  return out;
}

void TransitionKernel::convolve_nodes(std::span<const double> r, std::span<double> out,
                                      ConvolutionMethod method) const {
  const std::size_t n = grid_.size();
  if (r.size() != n || out.size() != n)
    throw Error(ErrorCode::kLengthMismatch, "node vector does not match the grid");
  std::fill(out.begin(), out.end(), 0.0);
  if (continuous_mass_ <= 0.0) return;

  std::size_t first = 0;
  while (first < n && r[first] == 0.0) ++first;
  if (first == n) return;
  std::size_t last = n - 1;
  while (r[last] == 0.0) --last;

  if (method == ConvolutionMethod::kDirect) {
    // out_i = sum_j r_j K[i-j] = sum_j r_j reversed_[n-1-i+j]
    for (std::size_t i = 0; i < n; ++i) {
      const double* k = reversed_.data() + (n - 1 - i);
      double acc = 0.0;
      for (std::size_t j = first; j <= last; ++j) acc += r[j] * k[j];
      out[i] = acc;
    }
    return;
  }

  const FftState& fft = *fft_;
  std::vector<double> real(fft.length, 0.0);
  std::vector<std::complex<double>> spec(fft.length / 2 + 1);
  std::copy(r.begin(), r.end(), real.begin());
  fftw_execute_dft_r2c(fft.forward, real.data(), reinterpret_cast<fftw_complex*>(spec.data()));
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= fft.kernel_spectrum[k];
  fftw_execute_dft_c2r(fft.backward, reinterpret_cast<fftw_complex*>(spec.data()), real.data());
  const double scale = 1.0 / static_cast<double>(fft.length);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(0.0, real[i + n - 1] * scale);
}

void TransitionKernel::correlate_nodes(std::span<const double> r, std::span<double> out) const {
  const std::size_t n = grid_.size();
  if (r.size() != n || out.size() != n)
    throw Error(ErrorCode::kLengthMismatch, "node vector does not match the grid");
  std::fill(out.begin(), out.end(), 0.0);
  if (continuous_mass_ <= 0.0) return;
  std::size_t first = 0;
  while (first < n && r[first] == 0.0) ++first;
  if (first == n) return;
  std::size_t last = n - 1;
  while (r[last] == 0.0) --last;
  // out_i = sum_j K[j-i] r_j = sum_j r_j weights_[j - i + n - 1]
  for (std::size_t i = 0; i < n; ++i) {
    const double* k = weights_.data() + (n - 1 - i);
    double acc = 0.0;
    for (std::size_t j = first; j <= last; ++j) acc += r[j] * k[j];
    out[i] = acc;
  }
}

GridDensity TransitionKernel::apply(const GridDensity& d, ConvolutionMethod method,
                                    double* clipped) const {
  if (d.has_atom() && continuous_mass_ > 0.0)
    return apply(d, method, clipped, translated_density(d.atom_location()));
  return apply(d, method, clipped, {});
}

GridDensity TransitionKernel::apply(const GridDensity& d, ConvolutionMethod method,
                                    double* clipped, std::span<const double> atom_spread) const {
  if (!(d.grid() == grid_))
    throw Error(ErrorCode::kLengthMismatch, "density and kernel live on different grids");
  const std::size_t n = grid_.size();
  std::vector<double> out(n);
  convolve_nodes(d.values(), out, method);
  const auto v = d.values();
  if (delta_weight_ > 0.0)
    for (std::size_t i = 0; i < n; ++i) out[i] += delta_weight_ * v[i];

  double atom_out = 0.0;
  if (d.has_atom()) {
    if (continuous_mass_ > 0.0) {
      if (atom_spread.size() != n)
        throw Error(ErrorCode::kLengthMismatch, "atom spread does not match the grid");
      for (std::size_t i = 0; i < n; ++i) out[i] += d.atom_weight() * atom_spread[i];
    }
    atom_out = d.atom_weight() * delta_weight_;
  }
  GridDensity raw(grid_, std::move(out), atom_out, d.atom_location());
  if (clipped != nullptr) *clipped += std::max(0.0, trapezoid_integral(d) - trapezoid_integral(raw));
  return normalize(raw);
}

GridDensity convolve(const GridDensity& d, const NoiseModel& kernel) {
  return TransitionKernel(kernel, d.grid()).apply(d);
}

// ---------------------------------------------------------------------------
// Bayes update and percentiles

BayesUpdate pointwise_bayes(const GridDensity& prior, std::span<const double> likelihood_at_nodes) {
  double atom_likelihood = 0.0;
  if (prior.has_atom()) {
    const Grid& g = prior.grid();
    const double pos = (prior.atom_location() - g.lo()) / g.spacing();
    const std::size_t i = std::min(static_cast<std::size_t>(std::floor(pos)), g.size() - 2);
    const double t = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
    if (likelihood_at_nodes.size() == g.size())
      atom_likelihood = (1.0 - t) * likelihood_at_nodes[i] + t * likelihood_at_nodes[i + 1];
  }
  return pointwise_bayes(prior, likelihood_at_nodes, atom_likelihood);
}

BayesUpdate pointwise_bayes(const GridDensity& prior, std::span<const double> likelihood_at_nodes,
                            double atom_likelihood) {
  const std::size_t n = prior.grid().size();
  if (likelihood_at_nodes.size() != n)
    throw Error(ErrorCode::kLengthMismatch, "likelihood length does not match the grid");
  std::vector<double> product(n);
  const auto v = prior.values();
  for (std::size_t i = 0; i < n; ++i) {
    const double l = likelihood_at_nodes[i];
    if (!std::isfinite(l) || l < 0.0)
      throw Error(ErrorCode::kInvalidParameter, "likelihood values must be finite and >= 0");
    product[i] = v[i] * l;
  }
  const double atom = prior.atom_weight() * atom_likelihood;
  const double evidence = trapezoid_integral(prior.grid(), product) + atom;
  if (!(evidence > 0.0) || !std::isfinite(evidence))
    throw Error(ErrorCode::kZeroEvidence, "observation has zero likelihood on the grid support");
  for (double& p : product) p /= evidence;
  return {GridDensity(prior.grid(), std::move(product), std::min(1.0, atom / evidence),
                      prior.atom_location()),
          evidence};
}

double percentile(const GridDensity& d, double q) {
  if (!(q > 0.0 && q < 1.0)) {
    std::ostringstream os;
    os << "percentile level must lie in (0, 1), got " << q;
    throw Error(ErrorCode::kDomainError, os.str());
  }
  const Grid& g = d.grid();
  const auto v = d.values();
  const double h = g.spacing();
  const double a = d.atom_location();
  bool atom_pending = d.has_atom();
  double cdf = 0.0;

  // Linear CDF over [x0, x1] carrying `mass`.
  auto piece = [&](double x0, double x1, double mass, double& result) {
    if (mass > 0.0 && cdf + mass >= q) {
      result = x0 + (x1 - x0) * (q - cdf) / mass;
      return true;
    }
    cdf += mass;
    return false;
  };
  auto atom_jump = [&](double& result) {
    atom_pending = false;
    if (cdf + d.atom_weight() >= q) {
      result = a;
      return true;
    }
    cdf += d.atom_weight();
    return false;
  };

  double result = 0.0;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double x0 = g.node(i);
    const double x1 = g.node(i + 1);
    const double mass = 0.5 * h * (v[i] + v[i + 1]);
    if (atom_pending && a <= x0) {
      if (atom_jump(result)) return result;
    }
    if (atom_pending && a < x1) {
      const double left = mass * (a - x0) / (x1 - x0);
      if (piece(x0, a, left, result)) return result;
      if (atom_jump(result)) return result;
      if (piece(a, x1, mass - left, result)) return result;
      continue;
    }
    if (piece(x0, x1, mass, result)) return result;
  }
  if (atom_pending) return a;
  return g.hi();
}

}  // namespace ngtrend
