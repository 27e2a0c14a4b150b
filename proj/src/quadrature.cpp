#include "dgue/quadrature.hpp"

#include <cmath>

#include "dgue/errors.hpp"

namespace dgue {

QuadratureRule QuadratureRule::mapped(double a, double b) const {
  QuadratureRule out;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  out.nodes.resize(nodes.size());
  out.weights.resize(weights.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out.nodes[i] = mid + half * nodes[i];
    out.weights[i] = half * weights[i];
  }
  return out;
}

QuadratureRule gauss_legendre(std::size_t m) {
  if (m == 0) throw ValidationError("quadrature order must be positive");
  QuadratureRule q;
  q.nodes.resize(m);
  q.weights.resize(m);
  const std::size_t half = (m + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // Tricomi's initial guess, then Newton on P_m with the three-term recurrence.
    long double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) / (static_cast<double>(m) + 0.5));
    long double dp = 0.0L;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1.0L;
      long double p1 = x;
      for (std::size_t k = 2; k <= m; ++k) {
        const long double p2 = ((2.0L * k - 1.0L) * x * p1 - (k - 1.0L) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0L);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::fabs(static_cast<double>(dx)) < 1e-19) break;
    }
    const double w = static_cast<double>(2.0L / ((1.0L - x * x) * dp * dp));
    q.nodes[i] = -static_cast<double>(x);
    q.nodes[m - 1 - i] = static_cast<double>(x);
    q.weights[i] = w;
    q.weights[m - 1 - i] = w;
  }
  if (m % 2 == 1) q.nodes[m / 2] = 0.0;
  return q;
}

QuadratureRule composite_gauss(double a, double b, std::size_t segments, std::size_t m) {
  if (segments == 0) throw ValidationError("composite rule needs at least one segment");
  const QuadratureRule base = gauss_legendre(m);
  QuadratureRule out;
  const double h = (b - a) / static_cast<double>(segments);
  for (std::size_t s = 0; s < segments; ++s) {
    const auto panel = base.mapped(a + s * h, a + (s + 1) * h);
    out.nodes.insert(out.nodes.end(), panel.nodes.begin(), panel.nodes.end());
    out.weights.insert(out.weights.end(), panel.weights.begin(), panel.weights.end());
  }
  return out;
}

}  // namespace dgue
