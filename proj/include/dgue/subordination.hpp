#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "dgue/measure.hpp"
#include "json.hpp"

namespace dgue {

struct Interval {
  double lo;
  double hi;
};

/// A point t where the integral of dmu/(t-x)^2 equals one.
///
/// Tangent points are local minima touching one from above: two components of
/// U meet there.
struct BoundaryPoint {
  double t;
  bool tangent;
};

struct SupportComponent {
  Interval t_range;
  Interval u_range;
};

struct SubordinationValue {
  std::complex<double> m;      // Stieltjes transform of mu_sc (+) mu at z
  std::complex<double> omega;  // subordination function at z
  double residual;
  int iterations;
};

class BianeMap {
 public:
  static constexpr double kTangentTolerance = 1e-10;

  explicit BianeMap(DiscreteMeasure mu);

  const DiscreteMeasure& measure() const { return mu_; }

  /// integral of dmu/(t-x)^2 - 1, +inf on an atom.
  double excess(double t) const;

  double v_of(double t) const;
  double psi(double t) const;
  /// t + m_mu(t); only meaningful off the atoms.
  double h(double t) const;
  /// Monotone bisection inverse of psi.
  double psi_inverse(double u) const;

  const std::vector<Interval>& u_set() const { return u_set_; }
  const std::vector<BoundaryPoint>& boundary_points() const { return boundary_; }
  const std::vector<SupportComponent>& support_components() const { return components_; }

  bool in_support(double u) const;
  /// Distance from u to the nearest support component.
  double distance_to_support(double u) const;
  double density_at(double u) const;

  /// Fixed point omega = z - m_mu(omega), reached by Newton continuation in Im z.
  SubordinationValue subordination_check(std::complex<double> z) const;

 private:
  void build_boundary();
  double boundary_root(double lo, double hi, bool increasing) const;

  DiscreteMeasure mu_;
  std::vector<BoundaryPoint> boundary_;
  std::vector<Interval> u_set_;
  std::vector<SupportComponent> components_;
};

nlohmann::json support_to_json(const BianeMap& map);

}  // namespace dgue
