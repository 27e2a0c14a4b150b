#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "dgue/errors.hpp"
#include "dgue/measure.hpp"

using dgue::Atom;
using dgue::DeformationModel;
using dgue::DiscreteMeasure;
using dgue::SpikeSet;

namespace {

DiscreteMeasure two_atom(double a) { return DiscreteMeasure({{-a, 0.5}, {a, 0.5}}); }

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "dgue_test_measure";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("measure construction sorts and merges atoms") {
  DiscreteMeasure mu({{1.0, 0.25}, {-1.0, 0.5}, {1.0 + 1e-13, 0.25}});
  REQUIRE(mu.size() == 2);
  CHECK(mu.atoms()[0].x == -1.0);
  CHECK(mu.atoms()[1].w == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(mu.mean()) < 1e-13);
  CHECK(mu.variance() == doctest::Approx(1.0));
}

TEST_CASE("measure rejects bad mass, weights and positions") {
  CHECK_THROWS_WITH_AS(DiscreteMeasure({{-1.0, 0.5}, {1.0, 0.4}}), doctest::Contains("mass ≠ 1"),
                       dgue::ValidationError);
  CHECK_THROWS_AS(DiscreteMeasure({{0.0, 1.5}, {1.0, -0.5}}), dgue::ValidationError);
  CHECK_THROWS_AS(DiscreteMeasure({{NAN, 1.0}}), dgue::ValidationError);
  CHECK_THROWS_AS(DiscreteMeasure(std::vector<Atom>{}), dgue::ValidationError);
}

TEST_CASE("empirical and grid factories") {
  const std::vector<double> xs{2.0, 0.0, 2.0, 1.0};
  const auto e = DiscreteMeasure::empirical(xs);
  REQUIRE(e.size() == 3);
  CHECK(e.atoms()[2].w == doctest::Approx(0.5));
  const auto g = DiscreteMeasure::uniform_grid(-1.0, 1.0, 4);
  CHECK(g.atoms()[0].x == doctest::Approx(-0.75));
  CHECK(g.atoms()[3].x == doctest::Approx(0.75));
}

TEST_CASE("stieltjes closed forms") {
  const auto d0 = DiscreteMeasure::dirac(0.0);
  CHECK(dgue::stieltjes(d0, 2.0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(dgue::stieltjes(d0, 2.0, 1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(std::abs(dgue::stieltjes(two_atom(1.0), 0.0, 2)) < 1e-15);
  CHECK_THROWS_AS(dgue::stieltjes(d0, 0.0, 0), dgue::ValidationError);
  CHECK_THROWS_AS(dgue::stieltjes(d0, 1.0, 4), dgue::ValidationError);
}

TEST_CASE("stieltjes mass normalization at large imaginary argument") {
  const DiscreteMeasure mu({{-2.0, 0.1}, {0.3, 0.6}, {5.0, 0.3}});
  const std::complex<double> z(0.0, 1e6);
  CHECK(std::abs(dgue::stieltjes(mu, z, 0) * z - 1.0) < 1e-5);
}

TEST_CASE("stieltjes derivatives match central differences of order zero") {
  const DiscreteMeasure mu({{-1.3, 0.2}, {0.0, 0.5}, {0.9, 0.3}});
  const double h = 1e-5;
  for (double z : {-2.5, -0.6, 1.7, 3.0}) {
    CHECK(mu.distance_to_atoms(z) >= 0.5);
    // d/dz of int 1/(z-x)^p is -p int 1/(z-x)^(p+1)
    for (int p = 1; p <= 3; ++p) {
      const double fd = (dgue::stieltjes(mu, z + h, p - 1) - dgue::stieltjes(mu, z - h, p - 1)) / (2.0 * h);
      const double exact = -p * dgue::stieltjes(mu, z, p);
      CHECK(std::abs(fd - exact) <= 1e-6 * std::abs(exact));
    }
  }
}

TEST_CASE("complex stieltjes reduces to real away from the axis") {
  const auto mu = two_atom(1.0);
  for (int p = 0; p <= 3; ++p) {
    const auto c = dgue::stieltjes(mu, std::complex<double>(2.5, 0.0), p);
    CHECK(c.real() == doctest::Approx(dgue::stieltjes(mu, 2.5, p)).epsilon(1e-14));
  }
}

TEST_CASE("quantile discretization") {
  CHECK(dgue::quantile_discretize(DiscreteMeasure::dirac(0.0), 5) == std::vector<double>(5, 0.0));
  CHECK(dgue::quantile_discretize(two_atom(1.0), 4) == std::vector<double>{-1.0, -1.0, 1.0, 1.0});
  const DiscreteMeasure q({{0.0, 0.25}, {1.0, 0.75}});
  CHECK(dgue::quantile_discretize(q, 4) == std::vector<double>{0.0, 1.0, 1.0, 1.0});
  CHECK_THROWS_AS(dgue::quantile_discretize(q, 0), dgue::ValidationError);
}

TEST_CASE("quantile moments converge at rate 1/m") {
  const DiscreteMeasure nu({{-1.0, 0.3}, {2.0, 0.7}});
  for (std::size_t m : {7u, 71u, 713u, 7129u}) {
    const auto q = dgue::quantile_discretize(nu, m);
    const auto e = DiscreteMeasure::empirical(q);
    const double err = std::abs(e.mean() - nu.mean()) + std::abs(e.variance() - nu.variance());
    CHECK(err * static_cast<double>(m) <= 5.0);
  }
}

TEST_CASE("spike sets") {
  SpikeSet s({{1.0, 2}, {3.0, 1}});
  CHECK(s.rank() == 3);
  CHECK(s.spikes()[0].theta == 3.0);
  CHECK(s.find(1.0)->k == 2);
  CHECK_FALSE(s.find(2.0).has_value());
  CHECK_THROWS_AS(SpikeSet({{1.0, 1}, {1.0, 2}}), dgue::ValidationError);
  CHECK_THROWS_AS(SpikeSet({{1.0, 0}}), dgue::ValidationError);
}

TEST_CASE("model from a JSON document") {
  const auto doc = nlohmann::json::parse(
      R"({"nu":{"atoms":[{"x":0.0,"w":1.0}]},"spikes":[{"theta":2.0,"k":1}],"N":100,"bulk_rule":"quantile"})");
  const auto model = dgue::load_model(doc);
  const auto spec = model.spectrum();
  REQUIRE(spec.size() == 100);
  CHECK(std::count(spec.begin(), spec.end(), 0.0) == 99);
  CHECK(spec.back() == 2.0);
  CHECK(model.max_bulk_distance() == 0.0);

  const auto two = dgue::load_model(nlohmann::json::parse(
      R"({"nu":{"atoms":[{"x":-1.0,"w":0.5},{"x":1.0,"w":0.5}]},"spikes":[],"N":10})"));
  CHECK(std::vector<double>(two.bulk().begin(), two.bulk().end()) ==
        std::vector<double>{-1, -1, -1, -1, -1, 1, 1, 1, 1, 1});

  const auto round = dgue::load_model(dgue::to_json(model));
  CHECK(round.spectrum() == spec);
}

TEST_CASE("model validation errors") {
  auto bad = [](const char* text) { return dgue::load_model(nlohmann::json::parse(text)); };
  CHECK_THROWS_WITH_AS(bad(R"({"nu":{"atoms":[{"x":-1,"w":0.5},{"x":1,"w":0.4}]},"spikes":[],"N":10})"),
                       doctest::Contains("mass ≠ 1"), dgue::ValidationError);
  CHECK_THROWS_AS(bad(R"({"nu":{"atoms":[{"x":0,"w":1}]},"spikes":[{"theta":2,"k":3}],"N":3})"),
                  dgue::ValidationError);
  CHECK_THROWS_AS(bad(R"({"nu":{"atoms":[{"x":0,"w":1}]},"spikes":[{"theta":0,"k":1}],"N":10})"),
                  dgue::ValidationError);
  CHECK_THROWS_AS(bad(R"({"nu":{"atoms":[{"x":0,"w":1}]},"N":"ten"})"), dgue::ValidationError);
  CHECK_THROWS_AS(bad(R"([1,2])"), dgue::ValidationError);
  CHECK_THROWS_AS(DeformationModel(DiscreteMeasure::dirac(0.0), {}, 4, {0.0, 0.0}), dgue::ValidationError);
}

TEST_CASE("reflection and shift keep the spectrum consistent") {
  const DeformationModel m(DiscreteMeasure({{-1.0, 0.25}, {0.5, 0.75}}), SpikeSet({{3.0, 1}}), 9);
  auto s = m.spectrum();
  auto r = m.reflected().spectrum();
  std::reverse(r.begin(), r.end());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(r[i] == -s[i]);
  const auto sh = m.shifted(2.0).spectrum();
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(sh[i] == doctest::Approx(s[i] + 2.0));
  CHECK(m.with_n(21).spectrum().size() == 21);
}

TEST_CASE("CSV model loader") {
  const auto dir = scratch_dir();
  {
    std::ofstream(dir / "nu.csv") << "x,w\n# comment\n-1,0.5\n1,0.5\n";
    std::ofstream(dir / "spikes.csv") << "theta,k\n4,1\n";
  }
  const auto model = dgue::load_model_csv(dir / "nu.csv", dir / "spikes.csv", 11);
  CHECK(model.r() == 1);
  CHECK(model.bulk().size() == 10);
  CHECK(model.spectrum().back() == 4.0);
  std::ofstream(dir / "bad.csv") << "x,w\n-1,abc\n";
  CHECK_THROWS_AS(dgue::load_model_csv(dir / "bad.csv", std::nullopt, 4), dgue::ValidationError);
}
