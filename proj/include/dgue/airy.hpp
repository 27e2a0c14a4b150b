#pragma once

namespace dgue {

struct AiryValue {
  double ai;
  double aip;
};

/// Boundary between the quad-precision Maclaurin series and the asymptotic
/// expansions.
inline constexpr double kAirySwitch = 8.0;

/// Ai and Ai' for x >= -200.
AiryValue airy(double x);
AiryValue airy_series(double x);
AiryValue airy_asymptotic(double x);

}  // namespace dgue
