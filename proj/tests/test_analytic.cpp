#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "vanet/analytic.hpp"

using namespace vanet;

TEST_CASE("quadrature engine handles known integrals") {
  REQUIRE(integrate([](double x) { return x * x; }, 0, 1) ==
          Catch::Approx(1.0 / 3.0).margin(1e-12));
  REQUIRE(integrate([](double x) { return std::sin(x); }, 0, 3.14159265358979323846) ==
          Catch::Approx(2.0).margin(1e-10));
}

TEST_CASE("planar clustering integral evaluates to 0.5865") {
  const double v = clustering_2d();
  REQUIRE(v == Catch::Approx(0.5865).margin(5e-4));
  // closed form of the lens-overlap integral
  const double closed = 1.0 - 3.0 * std::sqrt(3.0) / (4.0 * 3.14159265358979323846);
  REQUIRE(v == Catch::Approx(closed).margin(1e-7));
}

TEST_CASE("planar clustering integrand vanishes at the origin") {
  const double pi = 3.14159265358979323846;
  const double r = 1.0;
  const double lens_at_0 = 2 * r * r * std::acos(0.0) - 0.0;
  REQUIRE((2.0 * 0.0 / (r * r)) * lens_at_0 / (pi * r * r) == 0.0);
}

TEST_CASE("clustering values are radius invariant") {
  REQUIRE(std::abs(clustering_2d(1.0) - clustering_2d(250.0)) < 1e-9);
  REQUIRE(std::abs(clustering_1d_quadrature(1.0) - clustering_1d_quadrature(250.0)) < 1e-12);
}

TEST_CASE("line clustering is exactly 3/4") {
  REQUIRE(clustering_1d() == 0.75);
  REQUIRE(std::abs(clustering_1d_quadrature() - 0.75) < 1e-12);
}

TEST_CASE("degree model evaluation") {
  REQUIRE(gaussian_model_eval(2.0, 0.4, 2.0, 1.5) == Catch::Approx(0.4));          // peak
  REQUIRE(gaussian_model_eval(3.5, 0.4, 2.0, 1.5) == Catch::Approx(0.4 / std::exp(1.0)));
  REQUIRE(gaussian_model_eval(3.728, 0.1932, 3.728, 2.924) == Catch::Approx(0.1932));
  REQUIRE_THROWS_AS(gaussian_model_eval(-0.5, 1, 0, 1), std::domain_error);
  REQUIRE_THROWS_AS(gaussian_model_eval(1, 1, 0, 0), std::invalid_argument);
}

TEST_CASE("tail probability of the fitted degree model") {
  // sparse-network parameters: more than 3 neighbors is very unlikely
  REQUIRE(prob_degree_above(3, 0.5315, -0.1743, 1.74) < 0.05);
  // dense-network parameters: most vehicles have more than 4 neighbors
  REQUIRE(prob_degree_above(4, 0.1627, 5.098, 3.467) > 0.5);
  // threshold below the support
  REQUIRE(prob_degree_above(-1, 0.5315, -0.1743, 1.74) == 1.0);
}

TEST_CASE("tail probability is non-increasing in the threshold") {
  double prev = 1.0;
  for (int t = -1; t <= 20; ++t) {
    const double p = prob_degree_above(t, 0.1627, 5.098, 3.467);
    REQUIRE(p <= prev + 1e-15);
    REQUIRE(p >= 0.0);
    REQUIRE(p <= 1.0);
    prev = p;
  }
}

TEST_CASE("monte-carlo estimates agree with the integrals") {
  const long samples = 1000000;
  Rng rng2(42);
  const double mc2 = mc_clustering_2d(samples, rng2);
  const double sigma2 = std::sqrt(0.5865 * (1 - 0.5865) / samples);
  REQUIRE(std::abs(mc2 - clustering_2d()) < 3 * sigma2);
  Rng rng1(43);
  const double mc1 = mc_clustering_1d(samples, rng1);
  const double sigma1 = std::sqrt(0.75 * 0.25 / samples);
  REQUIRE(std::abs(mc1 - 0.75) < 3 * sigma1);
}
