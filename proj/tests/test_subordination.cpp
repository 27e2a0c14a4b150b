#include <doctest.h>

#include <cmath>
#include <random>

#include "dgue/errors.hpp"
#include "dgue/quadrature.hpp"
#include "dgue/subordination.hpp"

using dgue::BianeMap;
using dgue::DiscreteMeasure;

namespace {

DiscreteMeasure two_atom(double a) { return DiscreteMeasure({{-a, 0.5}, {a, 0.5}}); }

double semicircle(double u) { return std::abs(u) >= 2.0 ? 0.0 : std::sqrt(4.0 - u * u) / (2.0 * M_PI); }

// Integrates the density component by component with Gauss panels.
double total_mass(const BianeMap& map) {
  double mass = 0.0;
  for (const auto& c : map.support_components()) {
    const auto rule = dgue::composite_gauss(c.u_range.lo, c.u_range.hi, 1000, 10);
    for (std::size_t i = 0; i < rule.order(); ++i) mass += rule.weights[i] * map.density_at(rule.nodes[i]);
  }
  return mass;
}

}  // namespace

TEST_CASE("v for the point mass and the symmetric pair") {
  const BianeMap d0(DiscreteMeasure::dirac(0.0));
  CHECK(d0.v_of(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d0.v_of(0.6) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(d0.v_of(1.5) == 0.0);
  const BianeMap pair(two_atom(1.0));
  CHECK(pair.v_of(0.0) <= 1e-6);
}

TEST_CASE("psi closed forms") {
  const BianeMap d0(DiscreteMeasure::dirac(0.0));
  CHECK(d0.psi(0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d0.psi(2.0) == doctest::Approx(2.5).epsilon(1e-14));
  const BianeMap pair(two_atom(1.0));
  CHECK(std::abs(pair.psi(std::sqrt(3.0)) - 1.5 * std::sqrt(3.0)) < 1e-9);
}

TEST_CASE("U for the point mass and the pair at distance one") {
  const BianeMap d0(DiscreteMeasure::dirac(0.0));
  REQUIRE(d0.u_set().size() == 1);
  CHECK(d0.u_set()[0].lo == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(d0.u_set()[0].hi == doctest::Approx(1.0).epsilon(1e-12));

  const BianeMap pair(two_atom(1.0));
  REQUIRE(pair.u_set().size() == 2);
  CHECK(std::abs(pair.u_set()[0].lo + std::sqrt(3.0)) < 1e-10);
  CHECK(std::abs(pair.u_set()[0].hi) < 1e-10);
  CHECK(std::abs(pair.u_set()[1].hi - std::sqrt(3.0)) < 1e-10);
  REQUIRE(pair.support_components().size() == 1);
  const auto& c = pair.support_components()[0];
  CHECK(std::abs(c.u_range.hi - 1.5 * std::sqrt(3.0)) < 1e-9);
  CHECK(std::abs(c.u_range.lo + 1.5 * std::sqrt(3.0)) < 1e-9);
}

TEST_CASE("U for the pair at distance three against the quartic roots") {
  // 1/2 (t-3)^-2 + 1/2 (t+3)^-2 = 1 gives t^4 - 19 t^2 + 72 = 0.
  const double outer = std::sqrt((19.0 + std::sqrt(73.0)) / 2.0);
  const double inner = std::sqrt((19.0 - std::sqrt(73.0)) / 2.0);
  const BianeMap map(two_atom(3.0));
  REQUIRE(map.u_set().size() == 2);
  CHECK(std::abs(map.u_set()[0].lo + outer) < 1e-10);
  CHECK(std::abs(map.u_set()[0].hi + inner) < 1e-10);
  CHECK(std::abs(map.u_set()[1].lo - inner) < 1e-10);
  CHECK(std::abs(map.u_set()[1].hi - outer) < 1e-10);
  CHECK(map.support_components().size() == 2);
}

TEST_CASE("every U interval holds an atom and boundary points solve the equation") {
  const DiscreteMeasure mu({{-2.0, 0.2}, {-1.7, 0.1}, {0.0, 0.3}, {0.4, 0.1}, {2.5, 0.3}});
  const BianeMap map(mu);
  for (const auto& iv : map.u_set()) {
    bool has_atom = false;
    for (const auto& a : mu.atoms()) has_atom |= (a.x > iv.lo && a.x < iv.hi);
    CHECK(has_atom);
  }
  for (const auto& b : map.boundary_points()) CHECK(std::abs(map.excess(b.t)) <= 1e-10);
  for (const auto& a : mu.atoms()) CHECK(map.excess(a.x) > 0.0);
}

TEST_CASE("v invariant and monotone psi") {
  const DiscreteMeasure mu({{-1.5, 0.3}, {0.0, 0.2}, {0.2, 0.1}, {1.5, 0.4}});
  const BianeMap map(mu);
  double prev = -INFINITY;
  for (int i = 0; i <= 4000; ++i) {
    const double t = -4.0 + 8.0 * i / 4000.0;
    const double v = map.v_of(t);
    CHECK(v >= 0.0);
    if (mu.distance_to_atoms(t) > 0.0) {
      double g = 0.0;
      for (const auto& a : mu.atoms()) g += a.w / ((t - a.x) * (t - a.x) + v * v);
      CHECK(g <= 1.0 + 1e-10);
      if (v > 0.0) CHECK(std::abs(g - 1.0) <= 1e-10);
    }
    const double p = map.psi(t);
    CHECK(p > prev);
    prev = p;
  }
}

TEST_CASE("psi inverse") {
  const BianeMap map(two_atom(1.5));
  for (double t : {-3.0, -2.0, -1.0, -0.2, 0.5, 1.7, 2.9}) {
    CHECK(map.psi_inverse(map.psi(t)) == doctest::Approx(t).epsilon(1e-10));
  }
}

TEST_CASE("semicircle density") {
  const BianeMap d0(DiscreteMeasure::dirac(0.0));
  CHECK(d0.density_at(0.0) == doctest::Approx(1.0 / M_PI).epsilon(1e-12));
  CHECK(d0.density_at(1.0) == doctest::Approx(std::sqrt(3.0) / (2.0 * M_PI)).epsilon(1e-12));
  CHECK(d0.density_at(3.0) == 0.0);
  double worst = 0.0;
  for (int i = 0; i < 400; ++i) {
    const double u = -2.2 + 4.4 * (i + 0.5) / 400.0;
    worst = std::max(worst, std::abs(d0.density_at(u) - semicircle(u)));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("density has unit mass") {
  for (double a : {0.8, 1.0, 1.5}) {
    CHECK(std::abs(total_mass(BianeMap(two_atom(a))) - 1.0) <= 1e-4);
  }
  const BianeMap skew(DiscreteMeasure({{-1.0, 0.1}, {0.5, 0.6}, {3.0, 0.3}}));
  CHECK(std::abs(total_mass(skew) - 1.0) <= 1e-4);
}

TEST_CASE("subordination fixed point") {
  const BianeMap d0(DiscreteMeasure::dirac(0.0));
  const std::complex<double> z(0.0, 2.0);
  const auto s = d0.subordination_check(z);
  CHECK(std::abs(s.m * (z - s.m) - 1.0) <= 1e-12);
  CHECK(s.residual <= 1e-12);

  const auto near = d0.subordination_check({0.5, 1e-6});
  CHECK(std::abs(-near.m.imag() / M_PI - d0.density_at(0.5)) <= 1e-4);

  const BianeMap pair(two_atom(1.0));
  const std::complex<double> far(0.0, 10.0);
  CHECK(std::abs(pair.subordination_check(far).omega / far - 1.0) <= 0.02);
  CHECK_THROWS_AS(pair.subordination_check({1.0, 0.0}), dgue::ValidationError);
}

TEST_CASE("density agrees with Stieltjes inversion at random support points") {
  std::mt19937_64 gen(2024);
  for (const auto& mu : {DiscreteMeasure::dirac(0.0), two_atom(1.0), two_atom(1.5)}) {
    const BianeMap map(mu);
    const auto& comps = map.support_components();
    double width = 0.0;
    for (const auto& c : comps) width += c.u_range.hi - c.u_range.lo;
    std::uniform_real_distribution<double> pick(0.0, width);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      double r = pick(gen);
      double u = comps.back().u_range.hi;
      for (const auto& c : comps) {
        const double w = c.u_range.hi - c.u_range.lo;
        if (r <= w) {
          u = c.u_range.lo + r;
          break;
        }
        r -= w;
      }
      const auto s = map.subordination_check({u, 1e-6});
      worst = std::max(worst, std::abs(-s.m.imag() / M_PI - map.density_at(u)));
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("support export") {
  const auto j = dgue::support_to_json(BianeMap(two_atom(1.5)));
  REQUIRE(j.is_array());
  CHECK(j.size() == 2);
  CHECK(j[0].contains("t_range"));
  CHECK(j[0].contains("u_range"));
}
