#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ngtrend/mle_fit.hpp"

namespace ngtrend {

/// Named model configurations:
///   gaussian, laplace, cauchy, pearson-b:<b>, pearson-free,
///   glaplace-b:<b>, glaplace-free, gauss-gauss, gauss-unif, delta-unif,
///   delta-gauss.
/// Mixtures use a fixed wide second component, N(0, 4) or U[-4, 4].
/// Throws Error(kInvalidSpec) for unknown names.
FitSpec preset_spec(std::string_view name);

/// The preset's model with its dispersion replaced, for density and
/// influence displays (the fit starting values are too narrow to plot).
NoiseModel display_model(std::string_view name, double dispersion = 1.0);

/// The nine models of the standard comparison, in display order.
std::vector<std::string> comparison_preset_names();

/// Expands "all" into comparison_preset_names(); other names pass through.
std::vector<std::string> expand_preset_names(const std::vector<std::string>& names);

}  // namespace ngtrend
