#include "support.hpp"
#include "wcga/lpspace.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace wcga;

TEST_SUITE("lpspace") {
  TEST_CASE("grid layout and weights") {
    const Grid g(2, 4);
    CHECK(g.size() == 16);
    CHECK(g.weight() == doctest::Approx(1.0 / 16));
    // first axis varies slowest
    CHECK(g.position(1, 0) == 0);
    CHECK(g.position(1, 1) == 1);
    CHECK(g.position(4, 0) == 1);
    CHECK(g.coordinate(5, 0) == doctest::Approx(0.25));
    CHECK(g.coordinate(5, 1) == doctest::Approx(0.25));
    CHECK(g.node(7) == std::vector<double>{0.25, 0.75});
    CHECK_THROWS_AS(Grid(0, 4), std::invalid_argument);
    CHECK_THROWS_AS(Grid(1, 0), std::invalid_argument);
  }

  TEST_CASE("sampled function validates input") {
    auto grid = make_grid(1, 8);
    CHECK_THROWS_AS(SampledFunction(grid, Eigen::VectorXd::Zero(7)), std::invalid_argument);
    Eigen::VectorXd bad = Eigen::VectorXd::Zero(8);
    bad[3] = std::nan("");
    CHECK_THROWS_AS(SampledFunction(grid, bad), std::invalid_argument);
    const auto other = SampledFunction::zeros(make_grid(1, 16));
    CHECK_THROWS_AS(SampledFunction::zeros(grid) + other, std::invalid_argument);
  }

  TEST_CASE("norm of a constant") {
    auto grid = make_grid(2, 8);
    const SampledFunction c(grid, Eigen::VectorXd::Constant(64, -3.0));
    for (double p : {1.5, 2.0, 3.0, 7.0}) CHECK(lp_norm(c, p) == doctest::Approx(3.0).epsilon(1e-14));
  }

  TEST_CASE("integral of cos^4 is 3/8") {
    auto grid = make_grid(1, 64);
    Eigen::VectorXd v(64);
    for (int j = 0; j < 64; ++j) v[j] = std::cos(2 * std::numbers::pi * j / 64.0);
    const SampledFunction f(grid, v);
    CHECK(std::pow(lp_norm(f, 4.0), 4.0) == doctest::Approx(3.0 / 8.0).epsilon(1e-13));
    CHECK(lp_norm(f, 2.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-13));
  }

  TEST_CASE("norm of simple functions") {
    auto grid = make_grid(1, 256);
    CHECK(lp_norm(SampledFunction(grid, Eigen::VectorXd::Ones(256)), 4.0) == doctest::Approx(1.0));
    CHECK(lp_norm(SampledFunction::zeros(grid), 4.0) == 0.0);
    Eigen::VectorXd v(256);
    for (int j = 0; j < 256; ++j) v[j] = std::sqrt(2.0) * std::cos(2 * std::numbers::pi * j / 256.0);
    CHECK(std::abs(lp_norm(SampledFunction(grid, v), 2.0) - 1.0) <= 1e-10);
  }

  TEST_CASE("norm is overflow safe") {
    auto grid = make_grid(1, 4);
    const SampledFunction f(grid, Eigen::VectorXd::Constant(4, 1e200));
    const double n = lp_norm(f, 4.0);
    CHECK(std::isfinite(n));
    CHECK(n == doctest::Approx(1e200).epsilon(1e-12));
  }

  TEST_CASE("smoothness parameters") {
    const auto p4 = smoothness_params(4.0);
    CHECK(p4.q == 2.0);
    CHECK(p4.gamma == doctest::Approx(1.5));
    CHECK(p4.q_conj == doctest::Approx(2.0));
    CHECK(smoothness_params(2.0).gamma == doctest::Approx(0.5));
    const auto a = smoothness_params(3.0);
    CHECK(a.q == 2.0);
    CHECK(a.gamma == doctest::Approx(1.0));
    CHECK(a.q_conj == doctest::Approx(2.0));
    const auto b = smoothness_params(1.5);
    CHECK(b.q == 1.5);
    CHECK(b.gamma == doctest::Approx(1.0 / 1.5));
    CHECK(b.q_conj == doctest::Approx(3.0));
    CHECK_THROWS_AS(require_valid_exponent(1.0), std::invalid_argument);
    CHECK_THROWS_AS(require_valid_exponent(INFINITY), std::invalid_argument);
  }

  TEST_CASE("peak functional norms its source") {
    std::mt19937_64 rng(11);
    auto grid = make_grid(1, 32);
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
      const auto f = testing::random_function(grid, rng);
      CHECK(peak_functional(f, f, p) == doctest::Approx(lp_norm(f, p)).epsilon(1e-12));
      // Hoelder: |F(g)| <= ||g||
      for (int k = 0; k < 20; ++k) {
        const auto g = testing::random_function(grid, rng);
        CHECK(std::abs(peak_functional(f, g, p)) <= lp_norm(g, p) * (1 + 1e-12));
      }
    }
  }

  TEST_CASE("peak functional at p = 2 is a normalized inner product") {
    std::mt19937_64 rng(12);
    auto grid = make_grid(2, 6);
    const auto f = testing::random_function(grid, rng);
    const auto g = testing::random_function(grid, rng);
    CHECK(peak_functional(f, g, 2.0) == doctest::Approx(inner_product(f, g) / lp_norm(f, 2.0)).epsilon(1e-12));
  }

  TEST_CASE("peak functional matches the derivative of the norm") {
    std::mt19937_64 rng(13);
    auto grid = make_grid(1, 40);
    for (double p : {1.5, 3.0}) {
      for (int k = 0; k < 10; ++k) {
        const auto f = testing::random_function(grid, rng);
        const auto g = testing::random_function(grid, rng);
        CHECK(std::abs(peak_functional(f, g, p) - testing::norm_derivative(f, g, p)) < 1e-6);
      }
    }
  }

  TEST_CASE("peak functional is homogeneous in f") {
    std::mt19937_64 rng(14);
    auto grid = make_grid(1, 16);
    const auto f = testing::random_function(grid, rng);
    const auto g = testing::random_function(grid, rng);
    CHECK(peak_functional(5.0 * f, g, 3.0) == doctest::Approx(peak_functional(f, g, 3.0)).epsilon(1e-12));
    CHECK(peak_functional(-1.0 * f, g, 3.0) == doctest::Approx(-peak_functional(f, g, 3.0)).epsilon(1e-12));
  }

  TEST_CASE("zero element has no norming functional") {
    auto grid = make_grid(1, 8);
    const auto z = SampledFunction::zeros(grid);
    CHECK_THROWS_AS(NormingFunctional(z, 2.0), std::invalid_argument);
  }
}
