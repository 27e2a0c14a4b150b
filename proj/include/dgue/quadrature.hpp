#pragma once

#include <cstddef>
#include <vector>

namespace dgue {

/// Gauss-Legendre rule, stored on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t order() const { return nodes.size(); }
  /// Nodes and weights affinely mapped to [a, b].
  QuadratureRule mapped(double a, double b) const;
};

QuadratureRule gauss_legendre(std::size_t m);

/// `segments` equal panels on [a, b], each carrying an m-point rule.
QuadratureRule composite_gauss(double a, double b, std::size_t segments, std::size_t m);

}  // namespace dgue
