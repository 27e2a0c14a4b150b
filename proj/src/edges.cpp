#include "dgue/edges.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dgue/errors.hpp"
#include "dgue/summation.hpp"

namespace dgue {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Sign-change bisection to the last representable midpoint.
template <typename F>
double bisect(F&& f, double lo, double hi) {
  const bool lo_negative = f(lo) < 0.0;
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((f(mid) < 0.0) == lo_negative) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

double bracket_radius(const DeformationModel& model, const EdgeReport& report) {
  double r = report.extras.contains("bracket") ? report.extras["bracket"].get<double>()
                                               : 0.5 * model.nu().distance_to_atoms(report.t0);
  for (const auto& s : model.spikes().spikes()) {
    if (std::abs(s.theta - report.t0) <= DiscreteMeasure::kMergeTolerance) {
      throw ValidationError("a spike sits at the boundary point t0 = " + num(report.t0));
    }
    r = std::min(r, 0.5 * std::abs(s.theta - report.t0));
  }
  return r;
}

double h_of(const DiscreteMeasure& mu, double t) { return t + stieltjes(mu, t, 0); }

}  // namespace

std::string to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::kRightEdge: return "RightEdge";
    case EdgeKind::kLeftEdge: return "LeftEdge";
    case EdgeKind::kMergePoint: return "MergePoint";
    case EdgeKind::kOutlier: return "Outlier";
    case EdgeKind::kSticking: return "Sticking";
  }
  return "Unknown";
}

FDerivatives f_derivatives(const DiscreteMeasure& mu, double t) {
  return {1.0 - stieltjes(mu, t, 1), 2.0 * stieltjes(mu, t, 2), -6.0 * stieltjes(mu, t, 3)};
}

std::vector<EdgeReport> classify_boundary_points(const BianeMap& map) {
  const auto& nu = map.measure();
  const auto& pts = map.boundary_points();
  std::vector<EdgeReport> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double t = pts[i].t;
    const double m3 = stieltjes(nu, t, 2);
    double radius = nu.distance_to_atoms(t);
    if (i > 0) radius = std::min(radius, t - pts[i - 1].t);
    if (i + 1 < pts.size()) radius = std::min(radius, pts[i + 1].t - t);

    EdgeReport rep{};
    rep.t0 = t;
    rep.u0 = map.psi(t);
    rep.u0N = kNaN;
    if (std::abs(m3) <= kMergeThreshold) {
      rep.kind = EdgeKind::kMergePoint;
      rep.scale = merge_scale_kappa(nu, t);
    } else if (std::abs(m3) < kIllConditionedThreshold) {
      throw IllConditionedError("ill-conditioned classification at t = " + num(t) +
                                ": third moment " + num(m3) + " is neither zero nor separated from it");
    } else {
      rep.kind = m3 > 0.0 ? EdgeKind::kRightEdge : EdgeKind::kLeftEdge;
      rep.scale = edge_scale_alpha(nu, t);
    }
    const auto d = f_derivatives(nu, t);
    rep.extras["F2"] = d.order2;
    rep.extras["F3"] = d.order3;
    rep.extras["F4"] = d.order4;
    rep.extras["bracket"] = 0.5 * radius;
    out.push_back(std::move(rep));
  }
  return out;
}

std::vector<EdgeReport> classify_boundary_points(const DiscreteMeasure& nu) {
  return classify_boundary_points(BianeMap(nu));
}

double edge_scale_alpha(const DiscreteMeasure& mu, double t0) {
  const auto d = f_derivatives(mu, t0);
  if (std::abs(d.order2) > kEdgeThreshold) {
    throw ValidationError("t0 = " + num(t0) + " is not on the boundary of U (F'' = " + num(d.order2) + ")");
  }
  if (std::abs(d.order3) <= kMergeThreshold) {
    throw ValidationError("not a simple edge; use kappa");
  }
  return std::cbrt(2.0) / std::cbrt(std::abs(d.order3));
}

double merge_scale_kappa(const DiscreteMeasure& mu, double t0) {
  const auto d = f_derivatives(mu, t0);
  if (std::abs(d.order2) > kEdgeThreshold || std::abs(d.order3) > kMergeThreshold) {
    throw ValidationError("t0 = " + num(t0) + " is not a merge point (F'' = " + num(d.order2) +
                          ", F''' = " + num(d.order3) + ")");
  }
  return std::pow(std::abs(d.order4), 0.25);
}

EdgeReport outlier_report(const DiscreteMeasure& nu, const Spike& spike) {
  if (nu.distance_to_atoms(spike.theta) <= DiscreteMeasure::kMergeTolerance) {
    throw ValidationError("spike " + num(spike.theta) + " lies on supp(nu)");
  }
  const double m2 = stieltjes(nu, spike.theta, 1);
  EdgeReport rep{};
  rep.t0 = spike.theta;
  rep.u0N = kNaN;
  rep.multiplicity = spike.k;
  rep.extras["second_moment"] = m2;
  if (std::abs(m2 - 1.0) <= kMergeThreshold) {
    throw IllConditionedError("critical spike at theta = " + num(spike.theta) +
                              ": integral of dnu/(theta-x)^2 equals 1");
  }
  if (m2 < 1.0) {
    rep.kind = EdgeKind::kOutlier;
    rep.u0 = spike.theta + stieltjes(nu, spike.theta, 0);
    rep.scale = std::sqrt(1.0 - m2);
  } else {
    // The spike sits inside U and is absorbed by the bulk; u0 records where
    // psi sends it.
    rep.kind = EdgeKind::kSticking;
    rep.u0 = BianeMap(nu).psi(spike.theta);
    rep.scale = 0.0;
  }
  return rep;
}

namespace {

template <typename Term>
double sum_excluding(const DeformationModel& model, double theta, Term term) {
  if (!model.spikes().find(theta)) throw ValidationError(num(theta) + " is not a spike of the model");
  CompensatedSum<double> s;
  for (double y : model.bulk()) s.add(term(theta - y));
  for (const auto& sp : model.spikes().spikes()) {
    if (std::abs(sp.theta - theta) <= DiscreteMeasure::kMergeTolerance) continue;
    s.add(sp.k * term(theta - sp.theta));
  }
  return s.value() / model.n();
}

}  // namespace

double rho_n(const DeformationModel& model, double theta) {
  return theta + sum_excluding(model, theta, [](double d) { return 1.0 / d; });
}

double c_n(const DeformationModel& model, double theta) {
  const double m2 = sum_excluding(model, theta, [](double d) { return 1.0 / (d * d); });
  if (m2 >= 1.0) throw ValidationError("spike " + num(theta) + " generates no outlier at this N");
  return std::sqrt(1.0 - m2);
}

std::pair<double, double> eps_n(const DeformationModel& model, double t) {
  CompensatedSum<double> e;
  CompensatedSum<double> de;
  const double inv_n = 1.0 / model.n();
  for (double b : model.bulk()) {
    const double r = 1.0 / (t - b);
    e.add(inv_n * r);
    de.add(-inv_n * r * r);
  }
  e.add(-stieltjes(model.nu(), t, 0));
  de.add(stieltjes(model.nu(), t, 1));
  return {e.value(), de.value()};
}

FiniteNEdge finite_n_edge(const DeformationModel& model, const EdgeReport& edge) {
  if (edge.kind != EdgeKind::kRightEdge && edge.kind != EdgeKind::kLeftEdge) {
    throw ValidationError("finite_n_edge needs a RightEdge or LeftEdge report");
  }
  const DiscreteMeasure mu = model.spectral_measure();
  const double r = bracket_radius(model, edge);
  auto f = [&](double t) { return stieltjes(mu, t, 1) - 1.0; };
  const double lo = edge.t0 - r;
  const double hi = edge.t0 + r;
  const double flo = f(lo);
  const double fhi = f(hi);
  if (!(flo * fhi < 0.0)) {
    throw NotFoundError("no finite-N edge root within " + num(r) + " of t0 = " + num(edge.t0));
  }
  FiniteNEdge out{};
  out.t0N = bisect(f, lo, hi);
  out.u0N = h_of(mu, out.t0N);
  const auto [e, de] = eps_n(model, out.t0N);
  out.eps = e;
  out.eps_prime = de;
  out.predicted_u0N = edge.u0 + e + 0.25 * de * de;
  return out;
}

FiniteNMerge finite_n_merge(const DeformationModel& model, const EdgeReport& merge) {
  if (merge.kind != EdgeKind::kMergePoint) throw ValidationError("finite_n_merge needs a MergePoint report");
  const DiscreteMeasure mu = model.spectral_measure();
  const double r = std::min(bracket_radius(model, merge), 0.5 * mu.distance_to_atoms(merge.t0));
  auto g = [&](double t) { return stieltjes(mu, t, 2); };
  const double lo = merge.t0 - r;
  const double hi = merge.t0 + r;
  FiniteNMerge out{};
  if (g(merge.t0) == 0.0) {
    out.t0N = merge.t0;
  } else {
    if (!(g(lo) * g(hi) < 0.0)) {
      throw NotFoundError("no root of the third-moment equation within " + num(r) + " of t0 = " +
                          num(merge.t0));
    }
    out.t0N = bisect(g, lo, hi);
  }
  out.second_moment_gap = stieltjes(mu, out.t0N, 1) - 1.0;
  out.nondegenerate = std::abs(out.second_moment_gap) > kMergeThreshold;
  // With a vanishing gap v_N(t0N) = 0, so psi_N and H_N coincide there.
  out.u0N = h_of(mu, out.t0N);
  return out;
}

OutlierComponent outlier_component_n(const DeformationModel& model, const Spike& spike) {
  const auto rep = outlier_report(model.nu(), spike);
  if (rep.kind != EdgeKind::kOutlier) {
    throw ValidationError("spike " + num(spike.theta) + " generates no outlier");
  }
  const double theta = spike.theta;
  const double n = model.n();
  auto phi = [&](double t) {
    CompensatedSum<double> s;
    for (double y : model.bulk()) s.add(1.0 / ((t - y) * (t - y)));
    for (const auto& sp : model.spikes().spikes()) {
      if (std::abs(sp.theta - theta) <= DiscreteMeasure::kMergeTolerance) continue;
      s.add(sp.k / ((t - sp.theta) * (t - sp.theta)));
    }
    const double denom = 1.0 - s.value() / n;
    if (!(denom > 0.0)) {
      throw ConvergenceError("phi_N is singular near theta = " + num(theta) + "; spike too close to U_N");
    }
    return 1.0 / denom;
  };
  auto solve = [&](double sign) {
    double t = theta + sign * std::sqrt(spike.k / n * phi(theta));
    for (int it = 0; it < 500; ++it) {
      const double next = theta + sign * std::sqrt(spike.k / n * phi(t));
      if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t))) return next;
      t = next;
    }
    throw ConvergenceError("outlier component fixed point did not converge at theta = " + num(theta));
  };
  const DiscreteMeasure mu = model.spectral_measure();
  OutlierComponent out{};
  out.t1N = solve(-1.0);
  out.t2N = solve(1.0);
  out.LN = h_of(mu, out.t1N);
  out.DN = h_of(mu, out.t2N);
  out.rhoN = rho_n(model, theta);
  const double tau = 2.0 * std::sqrt(static_cast<double>(spike.k)) * rep.scale;
  out.LN_asymptotic = out.rhoN - tau / std::sqrt(n);
  out.DN_asymptotic = out.rhoN + tau / std::sqrt(n);
  out.midpoint_gap = std::abs(0.5 * (out.LN + out.DN) - out.rhoN);
  return out;
}

std::vector<EdgeReport> analyze_edges(const DeformationModel& model) {
  auto reports = classify_boundary_points(model.nu());
  for (auto& rep : reports) {
    if (rep.kind == EdgeKind::kMergePoint) {
      const auto m = finite_n_merge(model, rep);
      rep.u0N = m.u0N;
      rep.extras["t0N"] = m.t0N;
      rep.extras["second_moment_gap"] = m.second_moment_gap;
      rep.extras["nondegenerate_at_N"] = m.nondegenerate;
    } else {
      const auto e = finite_n_edge(model, rep);
      rep.u0N = e.u0N;
      rep.extras["t0N"] = e.t0N;
      rep.extras["predicted_u0N"] = e.predicted_u0N;
      rep.extras["eps"] = e.eps;
      rep.extras["eps_prime"] = e.eps_prime;
    }
  }
  for (const auto& s : model.spikes().spikes()) {
    auto rep = outlier_report(model.nu(), s);
    if (rep.kind == EdgeKind::kOutlier) {
      const auto c = outlier_component_n(model, s);
      rep.u0N = c.rhoN;
      rep.extras["rhoN"] = c.rhoN;
      rep.extras["cN"] = c_n(model, s.theta);
      rep.extras["t1N"] = c.t1N;
      rep.extras["t2N"] = c.t2N;
      rep.extras["LN"] = c.LN;
      rep.extras["DN"] = c.DN;
      rep.extras["LN_asymptotic"] = c.LN_asymptotic;
      rep.extras["DN_asymptotic"] = c.DN_asymptotic;
      rep.extras["midpoint_gap"] = c.midpoint_gap;
    }
    reports.push_back(std::move(rep));
  }
  std::stable_sort(reports.begin(), reports.end(),
                   [](const EdgeReport& a, const EdgeReport& b) { return a.u0 < b.u0; });
  return reports;
}

nlohmann::json to_json(const EdgeReport& r) {
  nlohmann::json j;
  j["kind"] = to_string(r.kind);
  j["t0"] = r.t0;
  j["u0"] = r.u0;
  j["u0N"] = std::isnan(r.u0N) ? nlohmann::json(nullptr) : nlohmann::json(r.u0N);
  j["scale"] = r.scale;
  if (r.kind == EdgeKind::kOutlier || r.kind == EdgeKind::kSticking) j["k"] = r.multiplicity;
  j["extras"] = r.extras;
  return j;
}

std::string edges_csv(const std::vector<EdgeReport>& reports) {
  std::ostringstream os;
  os.precision(17);
  os << "kind,u0,u0N,scale\n";
  for (const auto& r : reports) {
    os << to_string(r.kind) << ',' << r.u0 << ',';
    if (std::isnan(r.u0N)) {
      os << "nan";
    } else {
      os << r.u0N;
    }
    os << ',' << r.scale << '\n';
  }
  return os.str();
}

}  // namespace dgue
