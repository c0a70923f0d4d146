#include "ngtrend/presets.hpp"

#include <charconv>
#include <cmath>

#include "ngtrend/error.hpp"

namespace ngtrend {

namespace {

constexpr double kWideVar = 4.0;
constexpr double kWideHalfWidth = 4.0;
constexpr double kMixtureAlphaStart = 0.95;

double parse_shape(std::string_view name, std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
    throw Error(ErrorCode::kInvalidSpec, "bad shape value in preset '" + std::string(name) + "'");
  return v;
}

FitSpec make(std::string name, NoiseModel model, bool dispersion_free, bool shape_free) {
  FitSpec spec;
  spec.name = std::move(name);
  spec.model = std::move(model);
  spec.dispersion_free = dispersion_free;
  spec.shape_free = shape_free;
  return spec;
}

}  // namespace

FitSpec preset_spec(std::string_view name) {
  if (name == "gaussian") return make("gaussian", Gaussian{0.01}, true, false);
  if (name == "laplace") return make("laplace", GeneralizedLaplace{1.0, 10.0}, true, false);
  if (name == "cauchy") return make("cauchy", PearsonVII{1.0, 0.01}, true, false);
  if (name == "pearson-free") return make("pearson-free", PearsonVII{0.75, 0.01}, true, true);
  if (name == "glaplace-free")
    return make("glaplace-free", GeneralizedLaplace{0.5, 10.0}, true, true);
  if (name == "gauss-gauss")
    return make("gauss-gauss", Mixture{kMixtureAlphaStart, Gaussian{1e-4}, Gaussian{kWideVar}},
                true, true);
  if (name == "gauss-unif")
    return make("gauss-unif",
                Mixture{kMixtureAlphaStart, Gaussian{1e-4}, Uniform{-kWideHalfWidth, kWideHalfWidth}},
                true, true);
  if (name == "delta-unif")
    return make("delta-unif",
                Mixture{kMixtureAlphaStart, Delta{0.0}, Uniform{-kWideHalfWidth, kWideHalfWidth}},
                false, true);
  if (name == "delta-gauss")
    return make("delta-gauss", Mixture{kMixtureAlphaStart, Delta{0.0}, Gaussian{kWideVar}}, false,
                true);
  if (name.starts_with("pearson-b:")) {
    const double b = parse_shape(name, name.substr(10));
    if (std::isinf(b)) return make(std::string(name), Gaussian{0.01}, true, false);
    return make(std::string(name), PearsonVII{b, 0.01}, true, false);
  }
  if (name.starts_with("glaplace-b:")) {
    const double b = parse_shape(name, name.substr(11));
    return make(std::string(name), GeneralizedLaplace{b, 10.0}, true, false);
  }
  throw Error(ErrorCode::kInvalidSpec, "unknown preset '" + std::string(name) + "'");
}

NoiseModel display_model(std::string_view name, double dispersion) {
  NoiseModel m = preset_spec(name).model;
  if (has_dispersion(m)) set_dispersion(m, dispersion);
  return m;
}

std::vector<std::string> comparison_preset_names() {
  return {"gaussian",    "laplace",    "cauchy",     "pearson-free", "glaplace-free",
          "gauss-gauss", "gauss-unif", "delta-unif", "delta-gauss"};
}

std::vector<std::string> expand_preset_names(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const std::string& n : names) {
    if (n == "all") {
      for (std::string& m : comparison_preset_names()) out.push_back(std::move(m));
    } else {
      out.push_back(n);
    }
  }
  return out;
}

}  // namespace ngtrend
