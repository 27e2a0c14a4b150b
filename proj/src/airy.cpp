#include "dgue/airy.hpp"

#include <quadmath.h>

#include <cmath>
#include <string>

#include "dgue/errors.hpp"

namespace dgue {

namespace {

using quad = __float128;

struct SeriesConstants {
  quad c1;  // Ai(0)
  quad c2;  // -Ai'(0)
};

const SeriesConstants& series_constants() {
  static const SeriesConstants k = [] {
    const quad three = quad(3.0);
    return SeriesConstants{quad(1.0) / (powq(three, quad(2.0) / quad(3.0)) * tgammaq(quad(2.0) / quad(3.0))),
                           quad(1.0) / (powq(three, quad(1.0) / quad(3.0)) * tgammaq(quad(1.0) / quad(3.0)))};
  }();
  return k;
}

}  // namespace

AiryValue airy_series(double xd) {
  // Ai = c1 f - c2 g with f, g the two Maclaurin solutions of y'' = x y.
  // Quad precision absorbs the cancellation between f and g for x > 0.
  const auto& k = series_constants();
  const quad x = xd;
  const quad x3 = x * x * x;
  quad f = quad(1.0), g = x, fp = quad(0.0), gp = quad(1.0);
  quad tf = quad(1.0), tg = x, tfp = x * x / quad(2.0), tgp = quad(1.0);
  fp = tfp;
  for (int n = 1; n < 400; ++n) {
    const quad k3 = quad(3.0) * n;
    tf *= x3 / ((k3 - quad(1.0)) * k3);
    tg *= x3 / (k3 * (k3 + quad(1.0)));
    tgp *= x3 / (k3 * (k3 - quad(2.0)));
    f += tf;
    g += tg;
    gp += tgp;
    if (n >= 2) {
      tfp *= x3 / ((k3 - quad(3.0)) * (k3 - quad(1.0)));
      fp += tfp;
    }
    const quad scale = fabsq(f) + fabsq(g) + fabsq(fp) + fabsq(gp);
    if (n > 3 && fabsq(tf) + fabsq(tg) + fabsq(tfp) + fabsq(tgp) < quad(1e-36) * scale) break;
  }
  return {static_cast<double>(k.c1 * f - k.c2 * g), static_cast<double>(k.c1 * fp - k.c2 * gp)};
}

AiryValue airy_asymptotic(double x) {
  const double z = std::abs(x);
  const double zeta = 2.0 / 3.0 * z * std::sqrt(z);
  const double root_pi = std::sqrt(M_PI);
  const double q = std::sqrt(std::sqrt(z));

  // u_k, v_k coefficients, summed up to the smallest term.
  double u = 1.0;
  double v = 1.0;
  double pk = 1.0;  // 1/zeta^k
  if (x > 0.0) {
    double su = 1.0, sv = 1.0;
    double last = 1.0;
    for (int n = 1; n < 60; ++n) {
      u *= (6.0 * n - 5.0) * (6.0 * n - 3.0) * (6.0 * n - 1.0) / ((2.0 * n - 1.0) * 216.0 * n);
      v = -(6.0 * n + 1.0) / (6.0 * n - 1.0) * u;
      pk /= -zeta;
      const double term = std::abs(u * pk);
      if (term > last) break;
      su += u * pk;
      sv += v * pk;
      last = term;
      if (term < 1e-17) break;
    }
    const double e = std::exp(-zeta);
    return {e / (2.0 * root_pi * q) * su, -q * e / (2.0 * root_pi) * sv};
  }
  // Oscillatory side: even terms multiply the cosine, odd terms the sine.
  double pu_even = 1.0, pu_odd = 0.0, pv_even = 1.0, pv_odd = 0.0;
  double last = 1.0;
  for (int n = 1; n < 60; ++n) {
    u *= (6.0 * n - 5.0) * (6.0 * n - 3.0) * (6.0 * n - 1.0) / ((2.0 * n - 1.0) * 216.0 * n);
    v = -(6.0 * n + 1.0) / (6.0 * n - 1.0) * u;
    pk /= zeta;
    const double term = std::abs(u * pk);
    if (term > last) break;
    // (-1)^{floor(n/2)} sign pattern of the paired series
    const double sign = ((n / 2) % 2 == 0) ? 1.0 : -1.0;
    if (n % 2 == 0) {
      pu_even += sign * u * pk;
      pv_even += sign * v * pk;
    } else {
      pu_odd += sign * u * pk;
      pv_odd += sign * v * pk;
    }
    last = term;
    if (term < 1e-17) break;
  }
  const long double phase = static_cast<long double>(zeta) - M_PIl / 4.0L;
  const double c = static_cast<double>(std::cos(phase));
  const double s = static_cast<double>(std::sin(phase));
  return {(c * pu_even + s * pu_odd) / (root_pi * q), q / root_pi * (s * pv_even - c * pv_odd)};
}

AiryValue airy(double x) {
  if (std::isnan(x)) throw ValidationError("airy: argument is NaN");
  if (x < -200.0) throw ValidationError("airy: x = " + std::to_string(x) + " is in the overflow region (x < -200)");
  if (std::abs(x) <= kAirySwitch) return airy_series(x);
  if (x > 105.0) return {0.0, -0.0};
  return airy_asymptotic(x);
}

}  // namespace dgue
