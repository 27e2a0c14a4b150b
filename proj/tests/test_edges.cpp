#include <doctest.h>

#include <cmath>

#include "dgue/edges.hpp"
#include "dgue/errors.hpp"

using dgue::DeformationModel;
using dgue::DiscreteMeasure;
using dgue::EdgeKind;
using dgue::SpikeSet;

namespace {

DiscreteMeasure two_atom(double a) { return DiscreteMeasure({{-a, 0.5}, {a, 0.5}}); }

// Independent long-double moment sum used by the finite-difference oracles.
long double moment(const DiscreteMeasure& mu, long double t, int p) {
  long double s = 0.0L;
  for (const auto& a : mu.atoms()) s += a.w / std::pow(t - static_cast<long double>(a.x), p);
  return s;
}

template <class F>
long double five_point(F&& f, long double t, long double h) {
  return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h);
}

DeformationModel zeros_plus_spike(int n, double theta, int k) {
  return DeformationModel(DiscreteMeasure::dirac(0.0), SpikeSet({{theta, k}}), n);
}

}  // namespace

TEST_CASE("derivatives of F") {
  const auto d = dgue::f_derivatives(DiscreteMeasure::dirac(0.0), 2.0);
  CHECK(d.order2 == doctest::Approx(0.75));
  CHECK(d.order3 == doctest::Approx(0.25));
  CHECK(d.order4 == doctest::Approx(-6.0 / 16.0));
}

TEST_CASE("classification of the point mass") {
  const auto r = dgue::classify_boundary_points(DiscreteMeasure::dirac(0.0));
  REQUIRE(r.size() == 2);
  CHECK(r[0].kind == EdgeKind::kLeftEdge);
  CHECK(r[0].t0 == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r[0].u0 == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(r[1].kind == EdgeKind::kRightEdge);
  CHECK(r[1].u0 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r[1].scale == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("classification of symmetric pairs") {
  const auto r = dgue::classify_boundary_points(two_atom(1.0));
  REQUIRE(r.size() == 3);
  CHECK(r[0].kind == EdgeKind::kLeftEdge);
  CHECK(r[1].kind == EdgeKind::kMergePoint);
  CHECK(r[2].kind == EdgeKind::kRightEdge);
  CHECK(std::abs(r[1].t0) <= 1e-10);
  CHECK(std::abs(r[1].u0) <= 1e-10);
  CHECK(std::abs(r[2].t0 - std::sqrt(3.0)) <= 1e-10);
  CHECK(std::abs(r[2].u0 - 1.5 * std::sqrt(3.0)) <= 1e-9);
  CHECK(std::abs(r[1].scale - std::pow(6.0, 0.25)) <= 1e-10);

  const auto split = dgue::classify_boundary_points(two_atom(1.2));
  REQUIRE(split.size() == 4);
  CHECK(split[0].kind == EdgeKind::kLeftEdge);
  CHECK(split[1].kind == EdgeKind::kRightEdge);
  CHECK(split[2].kind == EdgeKind::kLeftEdge);
  CHECK(split[3].kind == EdgeKind::kRightEdge);
}

TEST_CASE("alpha against a finite difference of F''") {
  CHECK(dgue::edge_scale_alpha(DiscreteMeasure::dirac(0.0), 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(dgue::edge_scale_alpha(DiscreteMeasure::dirac(0.0), -1.0) == doctest::Approx(1.0).epsilon(1e-14));
  const auto nu = two_atom(1.5);
  const auto r = dgue::classify_boundary_points(nu);
  const double t0 = r.back().t0;
  auto f2 = [&](long double t) { return 1.0L - moment(nu, t, 2); };
  const long double f3 = five_point(f2, t0, 2e-4L);
  const double oracle = std::cbrt(2.0) / std::cbrt(std::abs(static_cast<double>(f3)));
  CHECK(std::abs(dgue::edge_scale_alpha(nu, t0) - oracle) <= 1e-10);
  CHECK_THROWS_WITH(dgue::edge_scale_alpha(two_atom(1.0), 0.0), doctest::Contains("use kappa"));
}

TEST_CASE("kappa at merge points") {
  CHECK(std::abs(dgue::merge_scale_kappa(two_atom(1.0), 0.0) - std::pow(6.0, 0.25)) <= 1e-12);
  CHECK_THROWS_AS(dgue::merge_scale_kappa(DiscreteMeasure::dirac(0.7), 0.7), dgue::ValidationError);
  CHECK_THROWS_AS(dgue::merge_scale_kappa(DiscreteMeasure::dirac(0.7), 1.7), dgue::ValidationError);

  // Symmetric four atoms with second moment exactly one at the origin.
  const DiscreteMeasure four({{-2.0, 3.0 / 14}, {-0.8, 2.0 / 7}, {0.8, 2.0 / 7}, {2.0, 3.0 / 14}});
  auto f3 = [&](long double t) { return 2.0L * moment(four, t, 3); };
  const long double f4 = five_point(f3, 0.0L, 1e-3L);
  const double oracle = std::pow(std::abs(static_cast<double>(f4)), 0.25);
  CHECK(std::abs(dgue::merge_scale_kappa(four, 0.0) - oracle) <= 1e-9);
  const auto r = dgue::classify_boundary_points(four);
  int merges = 0;
  for (const auto& e : r) merges += e.kind == EdgeKind::kMergePoint;
  CHECK(merges == 1);
}

TEST_CASE("a slightly tilted pair keeps its merge point") {
  // The gap minimum drops by O(tilt^2), well inside the tangency tolerance.
  const double w = 0.5 + 2e-7;
  const auto r = dgue::classify_boundary_points(DiscreteMeasure({{-1.0, w}, {1.0, 1.0 - w}}));
  REQUIRE(r.size() == 3);
  CHECK(r[1].kind == EdgeKind::kMergePoint);
  CHECK(std::abs(r[1].t0) < 1e-5);
}

TEST_CASE("outlier reports") {
  const auto d0 = DiscreteMeasure::dirac(0.0);
  const auto o = dgue::outlier_report(d0, {2.0, 1});
  CHECK(o.kind == EdgeKind::kOutlier);
  CHECK(o.u0 == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(o.scale == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-14));
  CHECK(dgue::outlier_report(d0, {0.5, 1}).kind == EdgeKind::kSticking);
  CHECK_THROWS_AS(dgue::outlier_report(d0, {1.0, 1}), dgue::IllConditionedError);
}

TEST_CASE("rho_N") {
  CHECK(dgue::rho_n(zeros_plus_spike(100, 2.0, 1), 2.0) == doctest::Approx(2.495).epsilon(1e-15));
  CHECK(std::abs(dgue::rho_n(zeros_plus_spike(100000, 2.0, 1), 2.0) - 2.5) < 1e-5);
  const DeformationModel m(two_atom(1.0), SpikeSet({{3.0, 1}}), 11);
  CHECK(dgue::rho_n(m, 3.0) == doctest::Approx(3.0 + 15.0 / 44.0).epsilon(1e-15));
  CHECK_THROWS_AS(dgue::rho_n(m, 2.0), dgue::ValidationError);
}

TEST_CASE("finite-N edge when the bulk equals nu") {
  const DeformationModel zero(DiscreteMeasure::dirac(0.0), {}, 50);
  const auto r = dgue::classify_boundary_points(zero.nu());
  const auto e = dgue::finite_n_edge(zero, r.back());
  CHECK(e.t0N == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(e.u0N == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(e.predicted_u0N == 2.0);

  const DeformationModel split(two_atom(1.5), {}, 300);
  for (const auto& edge : dgue::classify_boundary_points(split.nu())) {
    const auto f = dgue::finite_n_edge(split, edge);
    CHECK(std::abs(f.u0N - edge.u0) <= 1e-11);
    CHECK(std::abs(f.eps) <= 1e-15);
    CHECK(std::abs(f.eps_prime) <= 1e-15);
  }
}

TEST_CASE("finite-N merge") {
  const DeformationModel even(two_atom(1.0), {}, 200);
  const auto merge = dgue::classify_boundary_points(even.nu())[1];
  const auto m = dgue::finite_n_merge(even, merge);
  CHECK(m.t0N == 0.0);
  CHECK(m.u0N == 0.0);
  CHECK_FALSE(m.nondegenerate);

  // One spike far to the right tilts the third moment.
  const DeformationModel spiked(two_atom(1.0), SpikeSet({{5.0, 1}}), 101);
  const auto s = dgue::finite_n_merge(spiked, merge);
  const auto mu = spiked.spectral_measure();
  double scan = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double a = -0.5 + i * 5e-5;
    if (dgue::stieltjes(mu, a, 2) * dgue::stieltjes(mu, a + 5e-5, 2) <= 0.0) {
      scan = a + 2.5e-5;
      break;
    }
  }
  CHECK(std::abs(s.t0N - scan) <= 5e-5);
  CHECK(std::abs(s.t0N) > 0.0);
  CHECK(std::abs(s.t0N) * 101 < 10.0);

  std::vector<double> bulk(40, -1.0);
  bulk.insert(bulk.end(), 60, 1.0);
  const DeformationModel tilted(two_atom(1.0), {}, 100, bulk);
  const auto t = dgue::finite_n_merge(tilted, merge);
  const double gap = dgue::stieltjes(tilted.spectral_measure(), t.t0N, 1) - 1.0;
  CHECK(t.second_moment_gap == doctest::Approx(gap));
  CHECK(std::abs(gap) > 1e-9);
  CHECK(t.nondegenerate);
}

TEST_CASE("outlier component at finite N") {
  const auto c = dgue::outlier_component_n(zeros_plus_spike(100, 2.0, 1), {2.0, 1});
  const double half = 0.5 * (c.DN_asymptotic - c.LN_asymptotic);
  CHECK(half == doctest::Approx(std::sqrt(3.0) / 10.0).epsilon(1e-12));
  CHECK(c.t2N - 2.0 == doctest::Approx(0.11547).epsilon(0.05));
  CHECK(c.t1N < 2.0);
  CHECK(c.LN < c.rhoN);
  CHECK(c.DN > c.rhoN);

  const auto c4 = dgue::outlier_component_n(zeros_plus_spike(100, 2.0, 4), {2.0, 4});
  CHECK(0.5 * (c4.DN_asymptotic - c4.LN_asymptotic) == doctest::Approx(2.0 * half).epsilon(1e-12));
  CHECK_THROWS_AS(dgue::outlier_component_n(zeros_plus_spike(100, 0.5, 1), {0.5, 1}), dgue::ValidationError);
}

TEST_CASE("density straddles every right edge") {
  for (const auto& nu : {DiscreteMeasure::dirac(0.0), two_atom(1.5), two_atom(0.8),
                         DiscreteMeasure({{-1.0, 0.2}, {0.3, 0.5}, {2.5, 0.3}})}) {
    const dgue::BianeMap map(nu);
    const auto& comps = map.support_components();
    const double delta = 1e-3 * (comps.back().u_range.hi - comps.front().u_range.lo);
    for (const auto& e : dgue::classify_boundary_points(map)) {
      if (e.kind != EdgeKind::kRightEdge) continue;
      CHECK(map.density_at(e.u0 - delta) > 0.0);
      CHECK(map.density_at(e.u0 + delta) == 0.0);
    }
  }
}

// A square-root edge p(u) ~ sqrt(u0 - u) / (pi w^{3/2}) has Airy window w N^{-2/3}.
TEST_CASE("the square-root constant at an edge is the reciprocal of alpha") {
  for (const auto& nu : {DiscreteMeasure::dirac(0.0), two_atom(1.5), two_atom(0.8),
                         DiscreteMeasure({{-1.0, 0.2}, {0.3, 0.5}, {2.5, 0.3}})}) {
    const dgue::BianeMap map(nu);
    for (const auto& e : dgue::classify_boundary_points(map)) {
      if (e.kind != EdgeKind::kRightEdge) continue;
      const double h = 1e-6;
      const double w = std::pow(M_PI * map.density_at(e.u0 - h) / std::sqrt(h), -2.0 / 3.0);
      CHECK(w * e.scale == doctest::Approx(1.0).epsilon(1e-4));
    }
  }
}

TEST_CASE("edge kinds alternate along the line") {
  const DiscreteMeasure nu({{-3.0, 0.2}, {-1.0, 0.3}, {1.0, 0.3}, {4.0, 0.2}});
  const auto r = dgue::classify_boundary_points(nu);
  bool inside = false;
  for (const auto& e : r) {
    if (e.kind == EdgeKind::kLeftEdge) {
      CHECK_FALSE(inside);
      inside = true;
    } else if (e.kind == EdgeKind::kRightEdge) {
      CHECK(inside);
      inside = false;
    } else {
      CHECK(inside);
    }
  }
  CHECK_FALSE(inside);
}

TEST_CASE("outlier midpoint gap shrinks faster than the square-root scale") {
  double prev = INFINITY;
  for (int n : {100, 400, 1600}) {
    const auto c = dgue::outlier_component_n(zeros_plus_spike(n, 2.0, 1), {2.0, 1});
    const double scaled = c.midpoint_gap * std::sqrt(static_cast<double>(n));
    CHECK(scaled < prev);
    prev = scaled;
  }
}

TEST_CASE("a far spike leaves the limiting scales alone and moves finite-N edges by O(1/N)") {
  const auto d0 = DiscreteMeasure::dirac(0.0);
  auto edges = [&](int n, bool spike) {
    return dgue::analyze_edges(DeformationModel(d0, spike ? SpikeSet({{40.0, 1}}) : SpikeSet(), n));
  };
  const auto b200 = edges(200, false);
  const auto s200 = edges(200, true);
  const auto b400 = edges(400, false);
  const auto s400 = edges(400, true);
  CHECK(s200.back().kind == EdgeKind::kOutlier);
  for (std::size_t i = 0; i < b200.size(); ++i) {
    CHECK(std::abs(b200[i].scale - s200[i].scale) < 1e-6);
    const double d200 = std::abs(s200[i].u0N - b200[i].u0N);
    const double d400 = std::abs(s400[i].u0N - b400[i].u0N);
    CHECK(d200 > 0.0);
    CHECK(d400 / d200 == doctest::Approx(0.5).epsilon(0.05));
  }
}

TEST_CASE("report export") {
  const auto r = dgue::analyze_edges(DeformationModel(DiscreteMeasure::dirac(0.0), SpikeSet({{2.0, 1}}), 100));
  REQUIRE(r.size() == 3);
  CHECK(r[2].kind == EdgeKind::kOutlier);
  CHECK(r[2].u0N == doctest::Approx(2.495));
  const auto j = dgue::to_json(r[2]);
  CHECK(j["kind"] == "Outlier");
  CHECK(j["extras"].contains("LN"));
  const auto csv = dgue::edges_csv(r);
  CHECK(csv.rfind("kind,u0,u0N,scale\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(dgue::to_json(dgue::classify_boundary_points(DiscreteMeasure::dirac(0.0))[0])["u0N"].is_null());
}
