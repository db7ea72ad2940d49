#include "support.hpp"
#include "wcga/dictionaries.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace wcga;

namespace {

void check_unit_norms(const Dictionary& dict, double tol) {
  for (std::size_t i = 0; i < dict.size(); ++i) {
    CHECK(std::abs(lp_norm(dict.element(i), dict.p()) - 1.0) <= tol);
  }
}

}  // namespace

TEST_SUITE("dictionaries") {
  TEST_CASE("trig, N = 1, p = 2 is the orthonormal system") {
    auto grid = make_grid(1, 64);
    const auto dict = build_trig(1, 1, 2.0, grid);
    REQUIRE(dict.size() == 3);
    CHECK(dict.labels() == std::vector<std::string>{"1", "cos1", "sin1"});
    check_unit_norms(dict, 1e-10);
    for (int j = 0; j < 64; ++j) {
      const double x = j / 64.0;
      CHECK(dict.matrix()(j, 0) == doctest::Approx(1.0));
      CHECK(dict.matrix()(j, 1) == doctest::Approx(std::sqrt(2.0) * std::cos(2 * std::numbers::pi * x)));
      CHECK(dict.matrix()(j, 2) == doctest::Approx(std::sqrt(2.0) * std::sin(2 * std::numbers::pi * x)));
    }
    CHECK(dict.orthogonal_type());
  }

  TEST_CASE("trig in L4 uses the closed-form cos norm") {
    auto grid = make_grid(1, 64);
    const auto dict = build_trig(1, 2, 4.0, grid);
    REQUIRE(dict.size() == 5);
    check_unit_norms(dict, 1e-9);
    const double c4 = std::pow(3.0 / 8.0, 0.25);
    for (int j = 0; j < 64; ++j) {
      CHECK(dict.matrix()(j, 1) == doctest::Approx(std::cos(2 * std::numbers::pi * j / 64.0) / c4).epsilon(1e-12));
    }
  }

  TEST_CASE("trig tensor products") {
    auto grid = make_grid(2, 8);
    const auto dict = build_trig(2, 1, 3.0, grid);
    CHECK(dict.size() == 9);
    CHECK(dict.label(0) == "1*1");
    CHECK(dict.label(1) == "1*cos1");
    CHECK(dict.label(3) == "cos1*1");
    check_unit_norms(dict, 1e-9);
    CHECK_THROWS_AS(build_trig(1, 4, 2.0, make_grid(1, 8)), std::invalid_argument);
    CHECK_THROWS_AS(build_trig(1, 2, 2.0, grid), std::invalid_argument);
  }

  TEST_CASE("haar, J = 1") {
    auto grid = make_grid(1, 16);
    const auto dict = build_haar(1, 2.0, grid);
    REQUIRE(dict.size() == 2);
    CHECK(dict.label(0) == "[0,1]");
    CHECK(dict.label(1) == "(0,1]");
    for (int j = 0; j < 16; ++j) {
      CHECK(dict.matrix()(j, 0) == doctest::Approx(1.0));
      CHECK(dict.matrix()(j, 1) == doctest::Approx(j < 8 ? 1.0 : -1.0));
    }
    check_unit_norms(dict, 1e-10);
  }

  TEST_CASE("haar, J = 3 has 2^J elements normalized in L_1.5") {
    auto grid = make_grid(1, 32);
    const auto dict = build_haar(3, 1.5, grid);
    CHECK(dict.size() == 8);
    check_unit_norms(dict, 1e-9);
    // direct quadrature of |H|^1.5 for a level-2 function
    const auto col = dict.column(7);
    double s = 0.0;
    for (Eigen::Index i = 0; i < col.size(); ++i) s += std::pow(std::abs(col[i]), 1.5) / 32.0;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    std::set<std::string> labels(dict.labels().begin(), dict.labels().end());
    CHECK(labels.size() == 8);
    CHECK_THROWS_AS(build_haar(4, 2.0, make_grid(1, 8)), std::invalid_argument);
  }

  TEST_CASE("haar tensor product in two dimensions") {
    const auto dict = build_haar(2, 2.0, make_grid(2, 8));
    CHECK(dict.size() == 16);
    const Eigen::MatrixXd g = gram(dict);
    CHECK((g - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("orthonormal systems have identity Gram") {
    auto grid = make_grid(1, 64);
    const auto trig = build_trig(1, 5, 2.0, grid);
    CHECK((gram(trig) - Eigen::MatrixXd::Identity(11, 11)).cwiseAbs().maxCoeff() <= 1e-10);
    const auto haar = build_haar(4, 2.0, grid);
    CHECK((gram(haar) - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("indicator columns are orthogonal") {
    auto grid = make_grid(1, 4);
    const Eigen::MatrixXd cols = 3.0 * Eigen::MatrixXd::Identity(4, 4);
    const auto dict = build_matrix(cols, 2.0, grid);
    CHECK(dict.orthogonal_type());
    CHECK((gram(dict) - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("correlated pair") {
    auto grid = make_grid(1, 2);
    const double rho = 0.3;
    Eigen::MatrixXd cols(2, 2);
    cols << 1.0, rho, 0.0, std::sqrt(1 - rho * rho);
    // quadrature weight 1/2 rescales norms but not the normalized inner product
    const auto dict = build_matrix(cols, 2.0, grid);
    CHECK_FALSE(dict.orthogonal_type());
    const Eigen::MatrixXd g = gram(dict);
    CHECK(std::abs(g(0, 1) - rho) <= 1e-12);
    CHECK(std::abs(g(0, 0) - 1.0) <= 1e-12);
    CHECK(std::abs(gram(dict, {1, 0})(0, 1) - rho) <= 1e-12);
  }

  TEST_CASE("gaussian dictionaries are seeded and normalized") {
    auto grid = make_grid(1, 64);
    const auto a = build_gaussian(128, 2.0, grid, 5);
    const auto b = build_gaussian(128, 2.0, grid, 5);
    const auto c = build_gaussian(128, 2.0, grid, 6);
    CHECK(a.size() == 128);
    check_unit_norms(a, 1e-12);
    CHECK(a.matrix() == b.matrix());
    CHECK(a.matrix() != c.matrix());
    REQUIRE(a.descriptor());
    CHECK(build_from_descriptor(*a.descriptor()).matrix() == a.matrix());
  }

  TEST_CASE("constructor rejects bad input") {
    auto grid = make_grid(1, 4);
    const Eigen::MatrixXd unit = Eigen::MatrixXd::Identity(4, 2) * 2.0;  // L2 norm 1 with weight 1/4
    CHECK_NOTHROW(Dictionary(grid, unit, {"a", "b"}, 2.0));
    CHECK_THROWS_AS(Dictionary(grid, unit, {"a", "a"}, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(Dictionary(grid, unit * 2.0, {"a", "b"}, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(build_matrix(Eigen::MatrixXd::Zero(4, 1), 2.0, grid), std::invalid_argument);
  }

  TEST_CASE("sparse element synthesis") {
    auto grid = make_grid(1, 64);
    const auto dict = build_trig(1, 3, 2.0, grid);
    const SparseElement e({2, 5, 0}, {1.5, 0.0, -2.0});
    CHECK(e.sparsity() == 2);
    CHECK(e.l1_norm() == doctest::Approx(3.5));
    const auto f = e.synthesize(dict);
    const Eigen::VectorXd expected = 1.5 * dict.column(2) - 2.0 * dict.column(0);
    CHECK((f.values() - expected).cwiseAbs().maxCoeff() <= 1e-14);
    // Parseval
    CHECK(lp_norm(f, 2.0) == doctest::Approx(std::sqrt(1.5 * 1.5 + 4.0)));
    CHECK_THROWS_AS(SparseElement({1, 1}, {1.0, 2.0}), std::invalid_argument);
  }
}
