#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ngtrend {

/// Identifier written to output metadata. Draws are produced by mt19937_64
/// (whose output sequence is fixed by the standard) and mapped through
/// inverse CDFs, so a seed yields the same numbers on every platform.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64/inverse-cdf";

class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double standard_normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace ngtrend
