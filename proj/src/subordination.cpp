#include "dgue/subordination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dgue/errors.hpp"
#include "dgue/summation.hpp"

namespace dgue {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxNewton = 200;

// Lower bound of the excess on a gap from its two bounding atoms alone:
// min over the gap of wa/(t-a)^2 + wb/(b-t)^2.
double gap_lower_bound(double wa, double wb, double gap) {
  const double s = std::cbrt(wa) + std::cbrt(wb);
  return s * s * s / (gap * gap);
}

double third_moment_slope(std::span<const Atom> atoms, double t) {
  // derivative of the excess: -2 * integral of dmu/(t-x)^3
  double s = 0.0;
  for (const auto& a : atoms) {
    const double r = 1.0 / (t - a.x);
    s += a.w * r * r * r;
  }
  return -2.0 * s;
}

}  // namespace

BianeMap::BianeMap(DiscreteMeasure mu) : mu_(std::move(mu)) { build_boundary(); }

double BianeMap::excess(double t) const {
  CompensatedSum<double> s;
  s.add(-1.0);
  for (const auto& a : mu_.atoms()) {
    const double d = t - a.x;
    if (d == 0.0) return kInf;
    s.add(a.w / (d * d));
  }
  return s.value();
}

double BianeMap::v_of(double t) const {
  const auto atoms = mu_.atoms();
  const double f = excess(t);
  if (!(f > 0.0)) return 0.0;

  double s = 0.0;
  if (f > 1.0 || std::isinf(f)) {
    // Solve G(s) = sum w/(d^2+s) - 1 = 0. G is convex and decreasing, so Newton
    // started where G > 0 climbs monotonically to the root.
    if (std::isinf(f)) {
      for (const auto& a : atoms) {
        if (a.x == t) s = a.w;
      }
    }
    for (int it = 0; it < kMaxNewton; ++it) {
      CompensatedSum<double> g;
      g.add(-1.0);
      double dg = 0.0;
      for (const auto& a : atoms) {
        const double d = t - a.x;
        const double q = 1.0 / (d * d + s);
        g.add(a.w * q);
        dg += a.w * q * q;
      }
      const double gv = g.value();
      if (gv <= 0.0) break;
      const double step = gv / dg;
      s += step;
      if (step <= 2e-16 * s) break;
    }
  } else {
    // Near the boundary of U: h(s) = s * sum w/(d^2 (d^2+s)) - f keeps the small
    // quantity f explicit. h is concave increasing from h(0) = -f.
    for (int it = 0; it < kMaxNewton; ++it) {
      CompensatedSum<double> h;
      h.add(-f);
      double dh = 0.0;
      for (const auto& a : atoms) {
        const double d2 = (t - a.x) * (t - a.x);
        const double q = 1.0 / (d2 + s);
        h.add(s * a.w * q / d2);
        dh += a.w * q * q;
      }
      const double hv = h.value();
      if (hv >= 0.0) break;
      const double step = -hv / dh;
      s += step;
      if (step <= 2e-16 * s) break;
    }
  }
  return std::sqrt(s);
}

double BianeMap::psi(double t) const {
  const double v = v_of(t);
  const double s = v * v;
  CompensatedSum<double> acc;
  acc.add(t);
  for (const auto& a : mu_.atoms()) {
    const double d = t - a.x;
    acc.add(a.w * d / (d * d + s));
  }
  return acc.value();
}

double BianeMap::h(double t) const { return t + stieltjes(mu_, t, 0); }

double BianeMap::psi_inverse(double u) const {
  // |psi(t) - t| <= 1 by Cauchy-Schwarz against the unit-mass condition.
  double lo = u - 1.0;
  double hi = u + 1.0;
  for (const auto& c : components_) {
    if (u >= c.u_range.lo && u <= c.u_range.hi) {
      lo = c.t_range.lo;
      hi = c.t_range.hi;
      if (u == c.u_range.lo) return lo;
      if (u == c.u_range.hi) return hi;
      break;
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (psi(mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(psi(lo) - u) <= std::abs(psi(hi) - u) ? lo : hi;
}

double BianeMap::boundary_root(double lo, double hi, bool increasing) const {
  // Bisection on a bracket where the excess changes sign once. The endpoint
  // on the positive side may be an atom; midpoints never are.
  double best = increasing ? lo : hi;
  double best_abs = std::abs(excess(best));
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f = excess(mid);
    if (std::abs(f) < best_abs) {
      best = mid;
      best_abs = std::abs(f);
    }
    if ((f < 0.0) == increasing) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return best;
}

void BianeMap::build_boundary() {
  const auto atoms = mu_.atoms();
  const std::size_t m = atoms.size();
  boundary_.clear();

  boundary_.push_back({boundary_root(atoms.front().x - 1.0, atoms.front().x, true), false});

  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double a = atoms[i].x;
    const double b = atoms[i + 1].x;
    if (gap_lower_bound(atoms[i].w, atoms[i + 1].w, b - a) > 1.0 + 1e-6) continue;

    // The excess is strictly convex on (a, b); its slope is increasing there.
    double lo = a;
    double hi = b;
    double exact = std::numeric_limits<double>::quiet_NaN();
    for (int it = 0; it < 2000; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double slope = third_moment_slope(atoms, mid);
      if (slope == 0.0) {
        exact = mid;
        break;
      }
      if (slope < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    double tmin;
    if (!std::isnan(exact)) {
      tmin = exact;
    } else if (lo == a) {
      tmin = hi;
    } else if (hi == b) {
      tmin = lo;
    } else {
      tmin = std::abs(third_moment_slope(atoms, lo)) < std::abs(third_moment_slope(atoms, hi)) ? lo
                                                                                                 : hi;
    }
    const double fmin = excess(tmin);
    if (fmin > kTangentTolerance) continue;
    if (fmin >= -kTangentTolerance) {
      boundary_.push_back({tmin, true});
      continue;
    }
    boundary_.push_back({boundary_root(a, tmin, false), false});
    boundary_.push_back({boundary_root(tmin, b, true), false});
  }

  boundary_.push_back({boundary_root(atoms.back().x, atoms.back().x + 1.0, false), false});

  u_set_.clear();
  for (std::size_t j = 0; j + 1 < boundary_.size(); ++j) {
    const double lo = boundary_[j].t;
    const double hi = boundary_[j + 1].t;
    if (excess(0.5 * (lo + hi)) > 0.0) u_set_.push_back({lo, hi});
  }

  components_.clear();
  for (const auto& iv : u_set_) {
    if (!components_.empty() && components_.back().t_range.hi == iv.lo) {
      components_.back().t_range.hi = iv.hi;
    } else {
      components_.push_back({iv, {0.0, 0.0}});
    }
  }
  for (auto& c : components_) {
    c.u_range = {psi(c.t_range.lo), psi(c.t_range.hi)};
  }
}

bool BianeMap::in_support(double u) const {
  for (const auto& c : components_) {
    if (u >= c.u_range.lo && u <= c.u_range.hi) return true;
  }
  return false;
}

double BianeMap::distance_to_support(double u) const {
  double d = kInf;
  for (const auto& c : components_) {
    if (u >= c.u_range.lo && u <= c.u_range.hi) return 0.0;
    d = std::min({d, std::abs(u - c.u_range.lo), std::abs(u - c.u_range.hi)});
  }
  return d;
}

double BianeMap::density_at(double u) const {
  if (!in_support(u)) return 0.0;
  return v_of(psi_inverse(u)) / M_PI;
}

SubordinationValue BianeMap::subordination_check(std::complex<double> z) const {
  if (!(z.imag() > 0.0)) throw ValidationError("subordination_check needs Im z > 0");
  const auto atoms = mu_.atoms();
  const double reach = std::max(std::abs(mu_.min()), std::abs(mu_.max()));
  const double y_start = std::max(z.imag(), 4.0 * (reach + 2.0));

  auto residual = [&](std::complex<double> w, std::complex<double> zz, std::complex<double>* deriv) {
    CompensatedSum<std::complex<double>> m;
    std::complex<double> dm = 0.0;
    for (const auto& a : atoms) {
      const std::complex<double> r = 1.0 / (w - a.x);
      m.add(a.w * r);
      dm += a.w * r * r;
    }
    if (deriv) *deriv = 1.0 - dm;
    return w - zz + m.value();
  };

  std::complex<double> omega(z.real(), y_start);
  double y = y_start;
  int total = 0;
  double res = kInf;
  while (true) {
    const std::complex<double> zz(z.real(), y);
    for (int it = 0; it < 100; ++it, ++total) {
      std::complex<double> d;
      const std::complex<double> f = residual(omega, zz, &d);
      res = std::abs(f);
      if (res <= 1e-14 * std::max(1.0, std::abs(omega))) break;
      std::complex<double> step = f / d;
      double lambda = 1.0;
      while ((omega - lambda * step).imag() <= 0.0 && lambda > 1e-12) lambda *= 0.5;
      omega -= lambda * step;
    }
    if (y == z.imag()) break;
    y = std::max(z.imag(), 0.8 * y);
  }
  res = std::abs(residual(omega, z, nullptr));
  if (res > 1e-12) {
    throw ConvergenceError("subordination fixed point did not converge (residual " +
                           std::to_string(res) + ")");
  }
  return {z - omega, omega, res, total};
}

nlohmann::json support_to_json(const BianeMap& map) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : map.support_components()) {
    out.push_back({{"t_range", {c.t_range.lo, c.t_range.hi}}, {"u_range", {c.u_range.lo, c.u_range.hi}}});
  }
  return out;
}

}  // namespace dgue
