#include "ngtrend/noise_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ngtrend/error.hpp"
#include "ngtrend/rng.hpp"

namespace ngtrend {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidParameter, what);
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void validate_component(const NoiseComponent& c) {
  std::visit(Overloaded{
                 [](const Gaussian& g) {
                   if (!positive_finite(g.var)) invalid("Gaussian variance must be > 0");
                 },
                 [](const Uniform& u) {
                   if (!std::isfinite(u.lo) || !std::isfinite(u.hi) || !(u.lo < u.hi))
                     invalid("Uniform requires finite lo < hi");
                 },
                 [](const Delta& d) {
                   if (!std::isfinite(d.loc)) invalid("Delta location must be finite");
                 },
             },
             c);
}

double pearson_log_const(const PearsonVII& p) {
  const double tau = std::sqrt(p.tau2);
  return (2.0 * p.b - 1.0) * std::log(tau) + std::lgamma(p.b) - std::lgamma(0.5) -
         std::lgamma(p.b - 0.5);
}

double glaplace_log_const(const GeneralizedLaplace& g) {
  return std::log(g.b) + std::log(g.tau) / g.b - std::numbers::ln2 - std::lgamma(1.0 / g.b);
}

double gaussian_pdf(double var, double x) {
  return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

// Lower-tail mass P(X <= x) for x <= 0 of the symmetric families.
double gaussian_lower(double var, double x) {
  return 0.5 * boost::math::erfc(-x / std::sqrt(2.0 * var));
}

double pearson_lower(const PearsonVII& p, double x) {
  if (x == 0.0) return 0.5;
  return 0.5 * boost::math::ibeta(p.b - 0.5, 0.5, p.tau2 / (p.tau2 + x * x));
}

double glaplace_lower(const GeneralizedLaplace& g, double x) {
  if (x == 0.0) return 0.5;
  return 0.5 * boost::math::gamma_q(1.0 / g.b, g.tau * std::pow(std::abs(x), g.b));
}

// Symmetric families: cdf(x) via the lower tail on whichever side is small.
template <class Lower>
double symmetric_cdf(double x, Lower lower) {
  return x <= 0.0 ? lower(x) : 1.0 - lower(-x);
}

double component_density(const NoiseComponent& c, double x) {
  return std::visit(Overloaded{
                        [x](const Gaussian& g) { return gaussian_pdf(g.var, x); },
                        [x](const Uniform& u) {
                          return (x >= u.lo && x <= u.hi) ? 1.0 / (u.hi - u.lo) : 0.0;
                        },
                        [](const Delta&) { return 0.0; },
                    },
                    c);
}

// d/dx of the component density; `defined` cleared at kinks.
double component_slope(const NoiseComponent& c, double x, bool& defined) {
  return std::visit(Overloaded{
                        [x](const Gaussian& g) { return -x / g.var * gaussian_pdf(g.var, x); },
                        [x, &defined](const Uniform& u) {
                          if (x == u.lo || x == u.hi) defined = false;
                          return 0.0;
                        },
                        [](const Delta&) { return 0.0; },
                    },
                    c);
}

double component_cdf(const NoiseComponent& c, double x) {
  return std::visit(Overloaded{
                        [x](const Gaussian& g) {
                          return symmetric_cdf(x, [&](double t) { return gaussian_lower(g.var, t); });
                        },
                        [x](const Uniform& u) {
                          if (x <= u.lo) return 0.0;
                          if (x >= u.hi) return 1.0;
                          return (x - u.lo) / (u.hi - u.lo);
                        },
                        [](const Delta&) { return 0.0; },
                    },
                    c);
}

double component_sf(const NoiseComponent& c, double x) {
  return std::visit(Overloaded{
                        [x](const Gaussian& g) { return component_cdf(g, -x); },
                        [x](const Uniform& u) {
                          if (x <= u.lo) return 1.0;
                          if (x >= u.hi) return 0.0;
                          return (u.hi - x) / (u.hi - u.lo);
                        },
                        [](const Delta&) { return 0.0; },
                    },
                    c);
}

double component_second_moment(const NoiseComponent& c) {
  return std::visit(Overloaded{
                        [](const Gaussian& g) { return g.var; },
                        [](const Uniform& u) {
                          return (u.hi * u.hi + u.hi * u.lo + u.lo * u.lo) / 3.0;
                        },
                        [](const Delta& d) { return d.loc * d.loc; },
                    },
                    c);
}

double draw_component(const NoiseComponent& c, PortableRng& rng) {
  return std::visit(Overloaded{
                        [&rng](const Gaussian& g) { return std::sqrt(g.var) * rng.standard_normal(); },
                        [&rng](const Uniform& u) { return u.lo + (u.hi - u.lo) * rng.uniform(); },
                        [](const Delta& d) { return d.loc; },
                    },
                    c);
}

std::string component_name(const NoiseComponent& c) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&os](const Gaussian& g) { os << "G(0," << g.var << ")"; },
                 [&os](const Uniform& u) { os << "U[" << u.lo << "," << u.hi << "]"; },
                 [&os](const Delta& d) { os << "delta(" << d.loc << ")"; },
             },
             c);
  return os.str();
}

nlohmann::json component_to_json(const NoiseComponent& c) {
  return std::visit(
      Overloaded{
          [](const Gaussian& g) {
            return nlohmann::json{{"family", "gaussian"}, {"params", {{"var", g.var}}}};
          },
          [](const Uniform& u) {
            return nlohmann::json{{"family", "uniform"}, {"params", {{"lo", u.lo}, {"hi", u.hi}}}};
          },
          [](const Delta& d) {
            return nlohmann::json{{"family", "delta"}, {"params", {{"loc", d.loc}}}};
          },
      },
      c);
}

double number_field(const nlohmann::json& params, const char* key) {
  if (!params.contains(key) || !params.at(key).is_number())
    invalid(std::string("missing numeric parameter '") + key + "'");
  return params.at(key).get<double>();
}

const nlohmann::json& params_of(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
    invalid("noise model JSON needs a string 'family'");
  if (!j.contains("params") || !j.at("params").is_object())
    invalid("noise model JSON needs an object 'params'");
  return j.at("params");
}

NoiseComponent component_from_json(const nlohmann::json& j) {
  const auto& params = params_of(j);
  const auto family = j.at("family").get<std::string>();
  if (family == "gaussian") return Gaussian{number_field(params, "var")};
  if (family == "uniform") return Uniform{number_field(params, "lo"), number_field(params, "hi")};
  if (family == "delta") return Delta{params.contains("loc") ? number_field(params, "loc") : 0.0};
  invalid("unknown mixture component family '" + family + "'");
}

}  // namespace

double PortableRng::standard_normal() {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * uniform());
}

void validate(const NoiseModel& m) {
  std::visit(Overloaded{
                 [](const Gaussian& g) { validate_component(g); },
                 [](const PearsonVII& p) {
                   if (!std::isfinite(p.b) || p.b < kPearsonMinShape)
                     invalid("Pearson VII shape b must exceed 1/2");
                   if (!positive_finite(p.tau2)) invalid("Pearson VII tau2 must be > 0");
                 },
                 [](const GeneralizedLaplace& g) {
                   if (!positive_finite(g.b)) invalid("generalized Laplace shape b must be > 0");
                   if (!positive_finite(g.tau)) invalid("generalized Laplace tau must be > 0");
                 },
                 [](const Mixture& mx) {
                   if (!std::isfinite(mx.alpha) || mx.alpha < 0.0 || mx.alpha > 1.0)
                     invalid("mixture weight alpha must lie in [0, 1]");
                   validate_component(mx.f);
                   validate_component(mx.g);
                   if (std::holds_alternative<Delta>(mx.f) && std::holds_alternative<Delta>(mx.g))
                     invalid("a mixture may hold at most one Delta component");
                 },
             },
             m);
}

bool is_certified(const NoiseModel& m) {
  const auto* mx = std::get_if<Mixture>(&m);
  if (mx == nullptr) return true;
  auto delta_at_zero = [](const NoiseComponent& c) {
    const auto* d = std::get_if<Delta>(&c);
    return d != nullptr && d->loc == 0.0;
  };
  const bool f_gauss = std::holds_alternative<Gaussian>(mx->f);
  const bool f_delta = delta_at_zero(mx->f);
  const bool g_gauss = std::holds_alternative<Gaussian>(mx->g);
  const bool g_unif = std::holds_alternative<Uniform>(mx->g);
  return (f_gauss && (g_gauss || g_unif)) || (f_delta && (g_gauss || g_unif));
}

double density(const NoiseModel& m, double x) {
  validate(m);
  return std::visit(
      Overloaded{
          [x](const Gaussian& g) { return gaussian_pdf(g.var, x); },
          [x](const PearsonVII& p) {
            return std::exp(pearson_log_const(p) - p.b * std::log(x * x + p.tau2));
          },
          [x](const GeneralizedLaplace& g) {
            return std::exp(glaplace_log_const(g) - g.tau * std::pow(std::abs(x), g.b));
          },
          [x](const Mixture& mx) {
            return mx.alpha * component_density(mx.f, x) +
                   (1.0 - mx.alpha) * component_density(mx.g, x);
          },
      },
      m);
}

AtomMass atom_mass(const NoiseModel& m) {
  validate(m);
  const auto* mx = std::get_if<Mixture>(&m);
  if (mx == nullptr) return {};
  if (const auto* d = std::get_if<Delta>(&mx->f)) return {mx->alpha, d->loc};
  if (const auto* d = std::get_if<Delta>(&mx->g)) return {1.0 - mx->alpha, d->loc};
  return {};
}

double influence(const NoiseModel& m, double x) {
  validate(m);
  auto undefined = [x]() -> double {
    std::ostringstream os;
    os << "influence function undefined at x=" << x;
    throw Error(ErrorCode::kUndefinedAt, os.str());
  };
  return std::visit(
      Overloaded{
          [x](const Gaussian& g) { return x / g.var; },
          [x](const PearsonVII& p) { return 2.0 * p.b * x / (x * x + p.tau2); },
          [x, &undefined](const GeneralizedLaplace& g) {
            if (x == 0.0) return g.b > 1.0 ? 0.0 : undefined();
            const double mag = g.tau * g.b * std::pow(std::abs(x), g.b - 1.0);
            return x > 0.0 ? mag : -mag;
          },
          [x, &undefined](const Mixture& mx) {
            const double h = mx.alpha * component_density(mx.f, x) +
                             (1.0 - mx.alpha) * component_density(mx.g, x);
            bool defined = true;
            const double slope = mx.alpha * component_slope(mx.f, x, defined) +
                                 (1.0 - mx.alpha) * component_slope(mx.g, x, defined);
            if (!(h > 0.0) || !defined) return undefined();
            return -slope / h;
          },
      },
      m);
}

double continuous_cdf(const NoiseModel& m, double x) {
  return std::visit(
      Overloaded{
          [x](const Gaussian& g) { return component_cdf(g, x); },
          [x](const PearsonVII& p) {
            return symmetric_cdf(x, [&](double t) { return pearson_lower(p, t); });
          },
          [x](const GeneralizedLaplace& g) {
            return symmetric_cdf(x, [&](double t) { return glaplace_lower(g, t); });
          },
          [x](const Mixture& mx) {
            return mx.alpha * component_cdf(mx.f, x) + (1.0 - mx.alpha) * component_cdf(mx.g, x);
          },
      },
      m);
}

double continuous_sf(const NoiseModel& m, double x) {
  return std::visit(
      Overloaded{
          [x](const Gaussian& g) { return component_sf(g, x); },
          [x](const PearsonVII& p) {
            return symmetric_cdf(-x, [&](double t) { return pearson_lower(p, t); });
          },
          [x](const GeneralizedLaplace& g) {
            return symmetric_cdf(-x, [&](double t) { return glaplace_lower(g, t); });
          },
          [x](const Mixture& mx) {
            return mx.alpha * component_sf(mx.f, x) + (1.0 - mx.alpha) * component_sf(mx.g, x);
          },
      },
      m);
}

std::vector<double> sample(const NoiseModel& m, std::uint64_t seed, std::size_t count) {
  validate(m);
  PortableRng rng(seed);
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(std::visit(
        Overloaded{
            [&rng](const Gaussian& g) { return std::sqrt(g.var) * rng.standard_normal(); },
            [&rng](const PearsonVII& p) {
              // Student-t with 2b-1 degrees of freedom, rescaled by tau/sqrt(k).
              const double k = 2.0 * p.b - 1.0;
              const boost::math::students_t_distribution<double> t(k);
              return boost::math::quantile(t, rng.uniform()) * std::sqrt(p.tau2 / k);
            },
            [&rng](const GeneralizedLaplace& g) {
              // tau*|x|^b is Gamma(1/b, 1).
              const double gam = boost::math::gamma_p_inv(1.0 / g.b, rng.uniform());
              const double mag = std::pow(gam / g.tau, 1.0 / g.b);
              return rng.uniform() < 0.5 ? -mag : mag;
            },
            [&rng](const Mixture& mx) {
              const bool first = rng.uniform() < mx.alpha;
              return draw_component(first ? mx.f : mx.g, rng);
            },
        },
        m));
  }
  return out;
}

double scale_proxy(const NoiseModel& m) {
  return std::visit(
      Overloaded{
          [](const Gaussian& g) { return std::sqrt(g.var); },
          [](const PearsonVII& p) {
            const double tau = std::sqrt(p.tau2);
            return p.b > 1.5 ? tau / std::sqrt(2.0 * p.b - 3.0) : tau;
          },
          [](const GeneralizedLaplace& g) {
            const double width = std::pow(g.tau, -1.0 / g.b);
            return width * std::exp(0.5 * (std::lgamma(3.0 / g.b) - std::lgamma(1.0 / g.b)));
          },
          [](const Mixture& mx) {
            return std::sqrt(mx.alpha * component_second_moment(mx.f) +
                             (1.0 - mx.alpha) * component_second_moment(mx.g));
          },
      },
      m);
}

std::string describe(const NoiseModel& m) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&os](const Gaussian& g) { os << "Gaussian(var=" << g.var << ")"; },
                 [&os](const PearsonVII& p) {
                   os << "PearsonVII(b=" << p.b << ", tau2=" << p.tau2 << ")";
                 },
                 [&os](const GeneralizedLaplace& g) {
                   os << "GeneralizedLaplace(b=" << g.b << ", tau=" << g.tau << ")";
                 },
                 [&os](const Mixture& mx) {
                   os << "Mixture(alpha=" << mx.alpha << ", " << component_name(mx.f) << ", "
                      << component_name(mx.g) << ")";
                 },
             },
             m);
  return os.str();
}

nlohmann::json to_json(const NoiseModel& m) {
  return std::visit(
      Overloaded{
          [](const Gaussian& g) { return component_to_json(g); },
          [](const PearsonVII& p) {
            return nlohmann::json{{"family", "pearson7"}, {"params", {{"b", p.b}, {"tau2", p.tau2}}}};
          },
          [](const GeneralizedLaplace& g) {
            return nlohmann::json{{"family", "glaplace"}, {"params", {{"b", g.b}, {"tau", g.tau}}}};
          },
          [](const Mixture& mx) {
            return nlohmann::json{
                {"family", "mixture"},
                {"params",
                 {{"alpha", mx.alpha}, {"f", component_to_json(mx.f)}, {"g", component_to_json(mx.g)}}}};
          },
      },
      m);
}

NoiseModel noise_model_from_json(const nlohmann::json& j) {
  const auto& params = params_of(j);
  const auto family = j.at("family").get<std::string>();
  NoiseModel m;
  if (family == "gaussian") {
    m = Gaussian{number_field(params, "var")};
  } else if (family == "pearson7") {
    m = PearsonVII{number_field(params, "b"), number_field(params, "tau2")};
  } else if (family == "glaplace") {
    m = GeneralizedLaplace{number_field(params, "b"), number_field(params, "tau")};
  } else if (family == "mixture") {
    if (!params.contains("f") || !params.contains("g")) invalid("mixture needs components 'f' and 'g'");
    m = Mixture{number_field(params, "alpha"), component_from_json(params.at("f")),
                component_from_json(params.at("g"))};
  } else {
    invalid("unknown noise family '" + family + "'");
  }
  validate(m);
  return m;
}

}  // namespace ngtrend
