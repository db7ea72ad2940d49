#include "support.hpp"
#include "wcga/dictionaries.hpp"
#include "wcga/errors.hpp"
#include "wcga/solvers.hpp"

#include <doctest.h>

#include <cmath>

using namespace wcga;

namespace {

/// Brute-force minimizer of ||f0 - a g0 - b g1||_p by repeated grid refinement.
Eigen::Vector2d grid_search(const SampledFunction& f0, const Dictionary& dict, double p, Eigen::Vector2d center,
                            double radius) {
  auto objective = [&](double a, double b) {
    const Eigen::VectorXd r = f0.values() - a * dict.column(0) - b * dict.column(1);
    return lp_norm(r, dict.grid().weight(), p);
  };
  const int steps = 40;
  for (int round = 0; round < 12; ++round) {
    double best = INFINITY;
    Eigen::Vector2d arg = center;
    for (int i = -steps; i <= steps; ++i) {
      for (int j = -steps; j <= steps; ++j) {
        const double a = center[0] + radius * i / steps;
        const double b = center[1] + radius * j / steps;
        const double v = objective(a, b);
        if (v < best) {
          best = v;
          arg = {a, b};
        }
      }
    }
    center = arg;
    radius *= 0.2;
  }
  return center;
}

}  // namespace

TEST_SUITE("solvers") {
  TEST_CASE("empty span returns the target") {
    std::mt19937_64 rng(1);
    auto grid = make_grid(1, 32);
    const auto f0 = testing::random_function(grid, rng);
    const Eigen::MatrixXd span(32, 0);
    const auto proj = project_best(f0, span, 3.0);
    CHECK(proj.coefficients.size() == 0);
    CHECK(proj.residual.values() == f0.values());
    CHECK(proj.residual_norm == doctest::Approx(lp_norm(f0, 3.0)));
  }

  TEST_CASE("target inside the span") {
    auto grid = make_grid(1, 64);
    for (double p : {1.5, 2.0, 4.0}) {
      const auto dict = build_trig(1, 4, p, grid);
      const SparseElement e({1, 4, 6}, {2.0, -1.0, 0.5});
      const auto f0 = e.synthesize(dict);
      const auto proj = project_best(f0, dict, {1, 4, 6}, p);
      CHECK(proj.residual_norm <= 1e-10 * lp_norm(f0, p));
      CHECK(proj.coefficients[0] == doctest::Approx(2.0).epsilon(1e-8));
    }
  }

  TEST_CASE("p = 3 projection matches a grid search") {
    std::mt19937_64 rng(2);
    auto grid = make_grid(1, 64);
    const auto dict = build_trig(1, 1, 3.0, grid);
    const auto f0 = testing::random_function(grid, rng);
    const auto proj = project_best(f0, dict, {0, 1}, 3.0);
    const auto l2 = project_best(f0, dict.columns({0, 1}), 2.0);
    const Eigen::Vector2d oracle = grid_search(f0, dict, 3.0, l2.coefficients, 2.0);
    CHECK(std::abs(proj.coefficients[0] - oracle[0]) <= 1e-4);
    CHECK(std::abs(proj.coefficients[1] - oracle[1]) <= 1e-4);
  }

  TEST_CASE("first-order optimality at the returned point") {
    std::mt19937_64 rng(3);
    auto grid = make_grid(1, 128);
    for (double p : {1.5, 3.0, 4.0, 6.0}) {
      const auto dict = build_trig(1, 6, p, grid);
      const auto f0 = testing::random_function(grid, rng);
      const std::vector<std::size_t> idx{0, 3, 4, 9, 12};
      const auto proj = project_best(f0, dict, idx, p);
      CHECK(proj.converged);
      const double fn = lp_norm(f0, p);
      CHECK(proj.optimality <= 1e-9 * fn);
      CHECK(projection_optimality(proj.residual, dict.columns(idx), p) <= 1e-9 * fn);
      // optimality means no coordinate move reduces the norm
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto g = dict.element(idx[k]);
        CHECK(lp_norm(proj.residual + 1e-3 * g, p) >= proj.residual_norm - 1e-12);
        CHECK(lp_norm(proj.residual - 1e-3 * g, p) >= proj.residual_norm - 1e-12);
      }
    }
  }

  TEST_CASE("p = 2 direct and iterative paths agree") {
    std::mt19937_64 rng(4);
    auto grid = make_grid(1, 64);
    const auto dict = build_gaussian(6, 2.0, grid, 9);
    const auto f0 = testing::random_function(grid, rng);
    std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5};
    const auto direct = project_best(f0, dict, idx, 2.0);
    ProjectionOptions opts;
    opts.force_iterative = true;
    const auto newton = project_best(f0, dict, idx, 2.0, opts);
    CHECK((direct.coefficients - newton.coefficients).cwiseAbs().maxCoeff() <= 1e-8);
  }

  TEST_CASE("warm start reaches the same point") {
    std::mt19937_64 rng(5);
    auto grid = make_grid(1, 64);
    const auto dict = build_trig(1, 5, 4.0, grid);
    const auto f0 = testing::random_function(grid, rng);
    const std::vector<std::size_t> idx{1, 2, 7};
    const auto cold = project_best(f0, dict, idx, 4.0);
    const Eigen::VectorXd warm = cold.coefficients + Eigen::VectorXd::Constant(3, 0.1);
    const auto hot = project_best(f0, dict, idx, 4.0, {}, &warm);
    CHECK((cold.coefficients - hot.coefficients).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(hot.residual_norm == doctest::Approx(cold.residual_norm).epsilon(1e-12));
  }

  TEST_CASE("dependent span is rejected") {
    std::mt19937_64 rng(6);
    auto grid = make_grid(1, 16);
    const auto f0 = testing::random_function(grid, rng);
    Eigen::MatrixXd span(16, 2);
    span.col(0) = testing::random_vector(16, rng);
    span.col(1) = 2.0 * span.col(0);
    CHECK_THROWS_AS(project_best(f0, span, 3.0), NumericallyDependentSpan);
    try {
      project_best(f0, span, 3.0);
    } catch (const NumericallyDependentSpan& e) {
      CHECK(e.condition() > 1e12);
    }
  }

  TEST_CASE("iteration cap") {
    std::mt19937_64 rng(7);
    auto grid = make_grid(1, 64);
    const auto dict = build_trig(1, 5, 6.0, grid);
    const auto f0 = testing::random_function(grid, rng);
    ProjectionOptions opts;
    opts.max_inner_iter = 1;
    opts.opt_tol = 1e-15;
    const auto loose = project_best(f0, dict, {0, 1, 2, 3}, 6.0, opts);
    CHECK_FALSE(loose.converged);
    opts.strict = true;
    CHECK_THROWS_AS(project_best(f0, dict, {0, 1, 2, 3}, 6.0, opts), NoConvergence);
  }

  TEST_CASE("gram condition") {
    CHECK(gram_condition(Eigen::MatrixXd::Identity(4, 4), 1.0) == doctest::Approx(1.0));
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
    m(1, 1) = 0.1;
    CHECK(gram_condition(m, 0.5) == doctest::Approx(100.0));
  }

  TEST_CASE("grid mismatch") {
    const auto dict = build_trig(1, 2, 2.0, make_grid(1, 16));
    const auto f0 = SampledFunction(make_grid(1, 32), Eigen::VectorXd::Ones(32));
    CHECK_THROWS_AS(project_best(f0, dict, {0}, 2.0), std::invalid_argument);
  }
}
