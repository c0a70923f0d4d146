#include "ngtrend/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ngtrend {

namespace {

struct Vertex {
  std::vector<double> x;
  double f;
};

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double diameter(const std::vector<Vertex>& simplex) {
  double d = 0.0;
  for (std::size_t i = 0; i < simplex.size(); ++i)
    for (std::size_t j = i + 1; j < simplex.size(); ++j)
      d = std::max(d, distance(simplex[i].x, simplex[j].x));
  return d;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> start, const NelderMeadOptions& options) {
  const std::size_t dim = start.size();
  NelderMeadResult result;

  auto clamp = [&](std::vector<double> x) {
    for (double& v : x) v = std::clamp(v, options.lower, options.upper);
    return x;
  };
  auto eval = [&](std::vector<double> x) {
    x = clamp(std::move(x));
    double v = f(x);
    ++result.evals;
    if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
    return Vertex{std::move(x), v};
  };

  if (dim == 0) {
    const Vertex v = eval(start);
    return {v.x, v.f, result.evals, true};
  }

  std::vector<Vertex> simplex;
  simplex.reserve(dim + 1);
  simplex.push_back(eval(start));
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<double> x = simplex.front().x;
    x[i] += (x[i] + options.initial_step <= options.upper) ? options.initial_step
                                                           : -options.initial_step;
    simplex.push_back(eval(std::move(x)));
  }

  auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
  while (true) {
    std::sort(simplex.begin(), simplex.end(), by_value);
    if (diameter(simplex) < options.diameter_tol) {
      result.converged = true;
      break;
    }
    if (std::isfinite(simplex.back().f) &&
        simplex.back().f - simplex.front().f < options.value_tol)
      break;
    if (result.evals >= options.max_evals) break;

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t v = 0; v < dim; ++v)
      for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[v].x[i] / static_cast<double>(dim);
    auto along = [&](double t) {
      std::vector<double> x(dim);
      for (std::size_t i = 0; i < dim; ++i) x[i] = centroid[i] + t * (simplex.back().x[i] - centroid[i]);
      return x;
    };

    Vertex reflected = eval(along(-1.0));
    if (reflected.f < simplex.front().f) {
      Vertex expanded = eval(along(-2.0));
      simplex.back() = expanded.f < reflected.f ? std::move(expanded) : std::move(reflected);
      continue;
    }
    if (reflected.f < simplex[dim - 1].f) {
      simplex.back() = std::move(reflected);
      continue;
    }
    const bool outside = reflected.f < simplex.back().f;
    Vertex contracted = eval(along(outside ? -0.5 : 0.5));
    if (contracted.f < std::min(reflected.f, simplex.back().f)) {
      simplex.back() = std::move(contracted);
      continue;
    }
    for (std::size_t v = 1; v <= dim; ++v) {
      std::vector<double> x(dim);
      for (std::size_t i = 0; i < dim; ++i)
        x[i] = simplex.front().x[i] + 0.5 * (simplex[v].x[i] - simplex.front().x[i]);
      simplex[v] = eval(std::move(x));
    }
  }
  std::sort(simplex.begin(), simplex.end(), by_value);
  result.x = simplex.front().x;
  result.value = simplex.front().f;
  return result;
}

}  // namespace ngtrend
