#include "ngtrend/mle_fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "ngtrend/error.hpp"
#include "ngtrend/kalman.hpp"
#include "ngtrend/nelder_mead.hpp"
#include "ngtrend/ng_filter.hpp"
#include "ngtrend/parallel.hpp"
#include "ngtrend/rng.hpp"

namespace ngtrend {

namespace {

constexpr double kBox = 40.0;
constexpr double kBoundaryEps = 1e-3;
constexpr double kJitter = 0.3;
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void invalid_spec(const std::string& what) {
  throw Error(ErrorCode::kInvalidSpec, what);
}

bool has_shape(const NoiseModel& m) { return !std::holds_alternative<Gaussian>(m); }

double get_dispersion(const NoiseModel& m) {
  return std::visit(Overloaded{[](const Gaussian& g) { return g.var; },
                               [](const PearsonVII& p) { return p.tau2; },
                               [](const GeneralizedLaplace& l) { return l.tau; },
                               [](const Mixture& x) { return std::get<Gaussian>(x.f).var; }},
                    m);
}

double get_shape(const NoiseModel& m) {
  return std::visit(Overloaded{[](const Gaussian&) { return 0.0; },
                               [](const PearsonVII& p) { return p.b; },
                               [](const GeneralizedLaplace& l) { return l.b; },
                               [](const Mixture& x) { return x.alpha; }},
                    m);
}

void set_shape(NoiseModel& m, double v) {
  std::visit(Overloaded{[](Gaussian&) {}, [v](PearsonVII& p) { p.b = v; },
                        [v](GeneralizedLaplace& l) { l.b = v; }, [v](Mixture& x) { x.alpha = v; }},
             m);
}

double shape_to_free(const NoiseModel& m, double v) {
  if (std::holds_alternative<PearsonVII>(m)) return std::log(v - 0.5);
  if (std::holds_alternative<GeneralizedLaplace>(m)) return std::log(v);
  return std::log(v / (1.0 - v));
}

double shape_from_free(const NoiseModel& m, double z) {
  if (std::holds_alternative<PearsonVII>(m)) return 0.5 + std::exp(z);
  if (std::holds_alternative<GeneralizedLaplace>(m)) return std::exp(z);
  return 1.0 / (1.0 + std::exp(-z));
}

/// Maps a width s (in units of the data) to the family's dispersion.
double dispersion_for_width(const NoiseModel& m, double s) {
  if (const auto* l = std::get_if<GeneralizedLaplace>(&m)) return std::pow(s, -l->b);
  return s * s;
}

double variance(std::span<const double> v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size());
}

bool exact_gaussian(const NoiseModel& m, bool force_grid) {
  return !force_grid && std::holds_alternative<Gaussian>(m);
}

/// Evaluates the log-likelihood with the grid and initial density prepared
/// once per fit.
class LoglikEvaluator {
 public:
  LoglikEvaluator(std::span<const double> y, std::size_t nodes, double span, bool force_grid)
      : y_(y), force_grid_(force_grid), grid_(default_grid(y, nodes, span)),
        init_(diffuse_init(grid_, y)), kalman_init_(diffuse_state(y)) {}

  double operator()(const NoiseModel& model, double sigma2) const {
    if (exact_gaussian(model, force_grid_)) {
      const double var = std::get<Gaussian>(model).var;
      if (!(sigma2 > 0.0) || !(var >= 0.0) || !std::isfinite(sigma2) || !std::isfinite(var))
        throw Error(ErrorCode::kInvalidParameter, "variances must be finite and positive");
      return kalman_filter(y_, TrendParams{sigma2, var}, kalman_init_).loglik;
    }
    return ng_loglik(y_, NgModel{model, sigma2, grid_}, init_, ConvolutionMethod::kFft);
  }

 private:
  std::span<const double> y_;
  bool force_grid_;
  Grid grid_;
  GridDensity init_;
  GaussianState kalman_init_;
};

void check_series(std::span<const double> y) {
  if (y.size() < 10) invalid_spec("need at least 10 observations");
  for (double v : y)
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteInput, "series contains NaN or inf");
  if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); }))
    throw Error(ErrorCode::kDegenerateData, "constant series has no scale to estimate");
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct TableCells {
  std::string name, sigma2, tau2, shape, loglik, k, aic;
};

TableCells cells_of(const ComparisonRow& row) {
  TableCells c{row.name, "", "", "", "", "", ""};
  if (!row.result) return c;
  const FitResult& r = *row.result;
  c.sigma2 = format_number(r.obs_sigma2);
  if (has_dispersion(r.model)) c.tau2 = format_number(get_dispersion(r.model));
  if (has_shape(r.model)) c.shape = format_number(get_shape(r.model));
  c.loglik = format_number(r.loglik);
  c.k = std::to_string(r.k);
  c.aic = format_number(r.aic);
  return c;
}

}  // namespace

bool has_dispersion(const NoiseModel& m) {
  if (const auto* mix = std::get_if<Mixture>(&m)) return std::holds_alternative<Gaussian>(mix->f);
  return true;
}

void set_dispersion(NoiseModel& m, double v) {
  std::visit(Overloaded{[v](Gaussian& g) { g.var = v; }, [v](PearsonVII& p) { p.tau2 = v; },
                        [v](GeneralizedLaplace& l) { l.tau = v; },
                        [v](Mixture& x) { std::get<Gaussian>(x.f).var = v; }},
             m);
}

int free_parameter_count(const FitSpec& spec) {
  return int{spec.sigma2_free} + int{spec.dispersion_free} + int{spec.shape_free};
}

void validate(const FitSpec& spec) {
  validate(spec.model);
  if (spec.budget < 50) invalid_spec("optimizer budget must be at least 50");
  if (spec.restarts < 1) invalid_spec("need at least one restart");
  if (spec.grid_nodes < 3) invalid_spec("grid needs at least 3 nodes");
  if (!(spec.grid_span > 0.0) || !std::isfinite(spec.grid_span))
    invalid_spec("grid span must be positive");
  if (spec.dispersion_free && !has_dispersion(spec.model))
    invalid_spec("model has no dispersion parameter to estimate");
  if (spec.shape_free && !has_shape(spec.model))
    invalid_spec("model has no shape parameter to estimate");
  if ((!spec.sigma2_free || spec.start_from_spec) &&
      (!(spec.sigma2 > 0.0) || !std::isfinite(spec.sigma2)))
    invalid_spec("observation variance must be positive");
}

double model_loglik(std::span<const double> y, const NoiseModel& model, double obs_sigma2,
                    std::size_t grid_nodes, double grid_span, bool force_grid) {
  validate(model);
  return LoglikEvaluator(y, grid_nodes, grid_span, force_grid)(model, obs_sigma2);
}

FitResult fit(std::span<const double> y, const FitSpec& spec) {
  validate(spec);
  check_series(y);
  const LoglikEvaluator loglik(y, spec.grid_nodes, spec.grid_span, spec.force_grid);

  // Free coordinates are laid out as [sigma2][dispersion][shape], skipping
  // the fixed ones.
  const NoiseModel& base = spec.model;
  auto decode = [&](std::span<const double> z, NoiseModel& model, double& sigma2) {
    model = base;
    sigma2 = spec.sigma2;
    std::size_t i = 0;
    if (spec.sigma2_free) sigma2 = std::exp(z[i++]);
    if (spec.dispersion_free) set_dispersion(model, std::exp(z[i++]));
    if (spec.shape_free) set_shape(model, shape_from_free(base, z[i++]));
  };

  int evals = 0;
  std::optional<Error> last_error;
  auto objective = [&](std::span<const double> z) {
    ++evals;
    NoiseModel model;
    double sigma2 = 0.0;
    decode(z, model, sigma2);
    try {
      validate(model);
      return -loglik(model, sigma2);
    } catch (const Error& e) {
      last_error = e;
      return kInf;
    }
  };

  std::vector<double> diffs(y.size() - 1);
  for (std::size_t i = 1; i < y.size(); ++i) diffs[i - 1] = y[i] - y[i - 1];
  const double diff_var = std::max(variance(diffs), 1e-12 * variance(y));

  std::vector<double> start;
  if (spec.sigma2_free) start.push_back(std::log(spec.start_from_spec ? spec.sigma2 : diff_var / 2.0));
  std::size_t dispersion_index = start.size();
  if (spec.dispersion_free) start.push_back(std::log(get_dispersion(base)));
  if (spec.shape_free) start.push_back(shape_to_free(base, get_shape(base)));
  for (double& v : start) v = std::clamp(v, -kBox, kBox);

  // The dispersion spans orders of magnitude across families; pick the start
  // from a coarse log scan of widths below the spread of the differences.
  if (spec.dispersion_free && !spec.start_from_spec) {
    double best = kInf;
    double best_z = start[dispersion_index];
    for (int j = 0; j <= 8; ++j) {
      const double width = std::sqrt(diff_var) * std::pow(10.0, -0.5 * j);
      start[dispersion_index] = std::clamp(std::log(dispersion_for_width(base, width)), -kBox, kBox);
      const double v = objective(start);
      if (v < best) {
        best = v;
        best_z = start[dispersion_index];
      }
    }
    start[dispersion_index] = best_z;
  }

  NelderMeadOptions options;
  options.max_evals = spec.budget;
  options.lower = -kBox;
  options.upper = kBox;

  NelderMeadResult best_run;
  best_run.value = kInf;
  const int runs = start.empty() ? 1 : spec.restarts;
  for (int r = 0; r < runs; ++r) {
    std::vector<double> from = r == 0 || best_run.x.empty() ? start : best_run.x;
    if (r > 0) {
      PortableRng rng(spec.seed + static_cast<std::uint64_t>(r));
      for (double& v : from) v = std::clamp(v + kJitter * rng.standard_normal(), -kBox, kBox);
    }
    NelderMeadResult run = nelder_mead(objective, std::move(from), options);
    if (r == 0 || run.value < best_run.value) best_run = std::move(run);
  }

  if (!std::isfinite(best_run.value)) {
    if (last_error) throw *last_error;
    throw Error(ErrorCode::kNumericalBlowup, "no finite log-likelihood found");
  }

  FitResult result;
  result.name = spec.name.empty() ? describe(base) : spec.name;
  decode(best_run.x, result.model, result.obs_sigma2);
  result.loglik = -best_run.value;
  result.k = free_parameter_count(spec);
  result.aic = -2.0 * result.loglik + 2.0 * result.k;
  result.evals = evals;
  result.at_boundary = std::any_of(best_run.x.begin(), best_run.x.end(), [](double z) {
    return std::abs(z) > kBox - kBoundaryEps;
  });
  // A parameter pinned at the box edge is a legitimate optimum of the
  // clamped problem, so it counts as converged.
  result.converged = best_run.converged || result.at_boundary;
  return result;
}

std::vector<ProfileRow> profile(std::span<const double> y, const FitSpec& base,
                                std::span<const double> shapes) {
  if (shapes.empty()) invalid_spec("profile needs at least one shape value");
  if (!has_shape(base.model)) invalid_spec("profile needs a model with a shape parameter");
  std::vector<ProfileRow> rows(shapes.size());
  parallel_for(shapes.size(), [&](std::size_t i) {
    ProfileRow& row = rows[i];
    row.shape = shapes[i];
    FitSpec spec = base;
    spec.shape_free = false;
    const bool limit = std::isinf(shapes[i]) && shapes[i] > 0.0 &&
                       !std::holds_alternative<Mixture>(base.model);
    if (limit) {
      spec.model = Gaussian{1.0};
      spec.name = "gaussian";
    } else {
      set_shape(spec.model, shapes[i]);
      spec.name = (base.name.empty() ? describe(base.model) : base.name) + " shape=" +
                  format_number(shapes[i]);
    }
    try {
      row.result = fit(y, spec);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

ComparisonTable compare(std::span<const double> y, std::span<const FitSpec> specs) {
  if (specs.empty()) invalid_spec("compare needs at least one spec");
  ComparisonTable table;
  table.rows.resize(specs.size());
  parallel_for(specs.size(), [&](std::size_t i) {
    ComparisonRow& row = table.rows[i];
    row.name = specs[i].name.empty() ? describe(specs[i].model) : specs[i].name;
    try {
      row.result = fit(y, specs[i]);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const ComparisonRow& a, const ComparisonRow& b) {
                     if (a.result.has_value() != b.result.has_value()) return a.result.has_value();
                     if (!a.result) return a.name < b.name;
                     if (a.result->aic != b.result->aic) return a.result->aic < b.result->aic;
                     if (a.result->k != b.result->k) return a.result->k < b.result->k;
                     return a.name < b.name;
                   });
  return table;
}

std::string ComparisonTable::to_csv() const {
  std::ostringstream out;
  out << "Distribution,sigma2,tau2,b_or_alpha,loglik,k,aic\n";
  for (const ComparisonRow& row : rows) {
    const TableCells c = cells_of(row);
    out << c.name << ',' << c.sigma2 << ',' << c.tau2 << ',' << c.shape << ',' << c.loglik << ','
        << c.k << ',' << c.aic << '\n';
  }
  return out.str();
}

std::string ComparisonTable::to_text() const {
  std::vector<TableCells> all{{"Distribution", "sigma2", "tau2", "b_or_alpha", "loglik", "k", "aic"}};
  for (const ComparisonRow& row : rows) all.push_back(cells_of(row));
  std::size_t w[7] = {};
  for (const TableCells& c : all) {
    const std::string* f[7] = {&c.name, &c.sigma2, &c.tau2, &c.shape, &c.loglik, &c.k, &c.aic};
    for (int i = 0; i < 7; ++i) w[i] = std::max(w[i], f[i]->size());
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < all.size(); ++r) {
    const TableCells& c = all[r];
    const std::string* f[7] = {&c.name, &c.sigma2, &c.tau2, &c.shape, &c.loglik, &c.k, &c.aic};
    std::string line;
    for (int i = 0; i < 7; ++i) {
      std::string cell = *f[i];
      const std::string pad(w[i] - cell.size(), ' ');
      line += i == 0 ? cell + pad : "  " + pad + cell;
    }
    if (r > 0 && !rows[r - 1].result) line += "  failed: " + rows[r - 1].error;
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return out.str();
}

}  // namespace ngtrend
